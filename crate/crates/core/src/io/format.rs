//! JSON tree files.
//!
//! ```json
//! { "dim": 2, "landmarks_per_edge": 3,
//!   "edges": [ { "id": "trunk", "parent": null, "order": 0, "label": "trachea",
//!                "points": [[0, 0], [0, 1], [0, 2]] } ] }
//! ```
//!
//! Each edge lists its landmarks relative to its own start, so the first
//! point is the origin. Shapes are always written in canonical collapsed
//! form, in preorder.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree_model::{Attribute, CombinatorialTree, Layout, TreeShape};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub parent: Option<String>,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeFile {
    pub dim: usize,
    pub landmarks_per_edge: usize,
    pub edges: Vec<EdgeRecord>,
}

impl TreeFile {
    pub fn from_shape(s: &TreeShape) -> Self {
        let layout = s.layout();
        let t = s.topology();
        let edges = (0..s.len())
            .map(|e| EdgeRecord {
                id: s.ids()[e].clone(),
                parent: t.parent(e).map(|p| s.ids()[p].clone()),
                order: t.sibling_order(e),
                label: t.label(e).map(String::from),
                points: s.attr(e).landmarks(layout),
            })
            .collect();
        TreeFile { dim: layout.dim, landmarks_per_edge: layout.landmarks, edges }
    }

    pub fn to_shape(&self) -> Result<TreeShape> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Input(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        let layout = Layout::new(self.dim, self.landmarks_per_edge).map_err(|e| Error::Input(e.to_string()))?;
        let m = self.edges.len();
        let mut index = HashMap::with_capacity(m);
        for (i, e) in self.edges.iter().enumerate() {
            if index.insert(e.id.as_str(), i).is_some() {
                return Err(Error::Input(format!("duplicate edge id {:?}", e.id)));
            }
        }
        let mut roots: Vec<(usize, usize)> = Vec::new();
        let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
        for (i, e) in self.edges.iter().enumerate() {
            match &e.parent {
                None => roots.push((e.order, i)),
                Some(p) => {
                    let &pi = index
                        .get(p.as_str())
                        .ok_or_else(|| Error::Input(format!("edge {:?} has unknown parent {p:?}", e.id)))?;
                    children[pi].push((e.order, i));
                }
            }
        }
        let sorted = |mut v: Vec<(usize, usize)>| -> Result<Vec<usize>> {
            v.sort_unstable();
            if v.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Input("sibling edges share an order index".into()));
            }
            Ok(v.into_iter().map(|(_, i)| i).collect())
        };
        let roots = sorted(roots)?;
        let children: Vec<Vec<usize>> = children.into_iter().map(sorted).collect::<Result<_>>()?;
        let labels: Vec<Option<String>> = self.edges.iter().map(|e| e.label.clone()).collect();
        let (topo, new_index) = CombinatorialTree::from_children(&roots, &children, Some(&labels))
            .map_err(|_| Error::Input("edges do not form a rooted forest".into()))?;
        if new_index.iter().any(|&x| x == usize::MAX) {
            return Err(Error::Input("some edges are not reachable from a root (cycle)".into()));
        }
        let mut attrs = vec![Attribute::zeros(layout); m];
        let mut ids = vec![String::new(); m];
        for (i, e) in self.edges.iter().enumerate() {
            attrs[new_index[i]] = Attribute::from_landmarks(layout, &e.points)
                .map_err(|err| Error::Input(format!("edge {:?}: {err}", e.id)))?;
            ids[new_index[i]] = e.id.clone();
        }
        TreeShape::from_parts_collapsing(layout, topo, attrs, Some(ids))
    }
}

pub fn to_json(s: &TreeShape) -> String {
    let mut text = serde_json::to_string_pretty(&TreeFile::from_shape(s)).expect("tree files serialize");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<TreeShape> {
    let file: TreeFile = serde_json::from_str(text).map_err(|e| Error::Input(format!("invalid tree file: {e}")))?;
    file.to_shape()
}

pub fn read_tree(path: &Path) -> Result<TreeShape> {
    let text = fs::read_to_string(path)?;
    from_json(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn write_tree(path: &Path, s: &TreeShape) -> Result<()> {
    fs::write(path, to_json(s))?;
    Ok(())
}

/// All `*.json` tree files in `dir`, sorted by file name.
pub fn read_dir(dir: &Path) -> Result<Vec<(PathBuf, TreeShape)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Input(format!("no tree files in {}", dir.display())));
    }
    paths.into_iter().map(|p| read_tree(&p).map(|s| (p, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = TreeShape::from_bracket(Layout::scalar(), "1[0.5[1,3],2]").unwrap();
        let back = from_json(&to_json(&s)).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.ids(), s.ids());
    }

    #[test]
    fn collapsed_edges_are_contracted() {
        let text = r#"{"dim":1,"landmarks_per_edge":2,"edges":[
            {"id":"a","parent":null,"order":0,"points":[[0],[1]]},
            {"id":"z","parent":"a","order":0,"points":[[0],[0]]},
            {"id":"b","parent":"z","order":1,"points":[[0],[2]]},
            {"id":"c","parent":"z","order":0,"points":[[0],[3]]}]}"#;
        let s = from_json(text).unwrap();
        assert_eq!(s, TreeShape::from_bracket(Layout::scalar(), "1[3,2]").unwrap());
        assert_eq!(s.ids(), ["a", "c", "b"]);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            r#"{"dim":1,"landmarks_per_edge":2,"edges":[{"id":"a","parent":"q","order":0,"points":[[0],[1]]}]}"#,
            r#"{"dim":1,"landmarks_per_edge":2,"edges":[{"id":"a","parent":null,"order":0,"points":[[1],[1]]}]}"#,
            r#"{"dim":1,"landmarks_per_edge":2,"edges":[{"id":"a","parent":"b","order":0,"points":[[0],[1]]},
                {"id":"b","parent":"a","order":0,"points":[[0],[1]]}]}"#,
            r#"{"dim":4,"landmarks_per_edge":2,"edges":[]}"#,
            "not json",
        ];
        for text in bad {
            assert!(matches!(from_json(text), Err(Error::Input(_))), "{text}");
        }
    }
}
