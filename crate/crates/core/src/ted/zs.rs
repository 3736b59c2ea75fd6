//! Zhang–Shasha ordered tree edit distance on edge-attributed forests.
//!
//! Each edge becomes a node; a virtual root with a zero attribute is added
//! on both sides and always matched to its counterpart.

use crate::labels::LabelRules;
use crate::tree_model::{CombinatorialTree, TreeShape};

struct Post {
    /// 1-based postorder; the last node is the virtual root (`None`).
    node: Vec<Option<usize>>,
    lml: Vec<usize>,
    keyroots: Vec<usize>,
}

impl Post {
    fn new(t: &CombinatorialTree) -> Self {
        let mut node = vec![None];
        let mut lml = vec![0];
        fn walk(t: &CombinatorialTree, e: usize, node: &mut Vec<Option<usize>>, lml: &mut Vec<usize>) -> usize {
            let mut first = None;
            for &c in t.children(e) {
                let l = walk(t, c, node, lml);
                first.get_or_insert(l);
            }
            node.push(Some(e));
            let me = node.len() - 1;
            let l = first.unwrap_or(me);
            lml.push(l);
            l
        }
        let mut first = None;
        for &r in t.roots() {
            let l = walk(t, r, &mut node, &mut lml);
            first.get_or_insert(l);
        }
        node.push(None);
        let root = node.len() - 1;
        lml.push(first.unwrap_or(root));
        let n = root;
        let mut keyroots: Vec<usize> = (1..=n)
            .filter(|&i| (i + 1..=n).all(|k| lml[k] != lml[i]))
            .collect();
        keyroots.sort_unstable();
        Post { node, lml, keyroots }
    }

    fn root(&self) -> usize {
        self.node.len() - 1
    }
}

pub(crate) struct Alignment {
    pub cost: f64,
    /// Matched (source edge, target edge) pairs, excluding the virtual roots.
    pub pairs: Vec<(usize, usize)>,
    pub deleted: Vec<usize>,
    pub inserted: Vec<usize>,
}

pub(crate) struct ZhangShasha<'a> {
    s: &'a TreeShape,
    t: &'a TreeShape,
    rules: &'a LabelRules,
    sp: Post,
    tp: Post,
    td: Vec<Vec<f64>>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

impl<'a> ZhangShasha<'a> {
    pub fn new(s: &'a TreeShape, t: &'a TreeShape, rules: &'a LabelRules) -> Self {
        let sp = Post::new(s.topology());
        let tp = Post::new(t.topology());
        let td = vec![vec![f64::INFINITY; tp.node.len()]; sp.node.len()];
        let mut zs = ZhangShasha { s, t, rules, sp, tp, td };
        for ii in 0..zs.sp.keyroots.len() {
            for jj in 0..zs.tp.keyroots.len() {
                let (i, j) = (zs.sp.keyroots[ii], zs.tp.keyroots[jj]);
                zs.forest_table(i, j, true);
            }
        }
        zs
    }

    fn del(&self, a: usize) -> f64 {
        match self.sp.node[a] {
            None => f64::INFINITY,
            Some(e) if self.rules.can_drop(self.s.topology().label(e)) => self.s.attr(e).norm(),
            Some(_) => f64::INFINITY,
        }
    }

    fn ins(&self, b: usize) -> f64 {
        match self.tp.node[b] {
            None => f64::INFINITY,
            Some(f) if self.rules.can_drop(self.t.topology().label(f)) => self.t.attr(f).norm(),
            Some(_) => f64::INFINITY,
        }
    }

    fn rel(&self, a: usize, b: usize) -> f64 {
        match (self.sp.node[a], self.tp.node[b]) {
            (None, None) => 0.0,
            (Some(e), Some(f)) => {
                if self.rules.can_match(self.s.topology().label(e), self.t.topology().label(f)) {
                    self.s.attr(e).dist(self.t.attr(f))
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    }

    fn forest_table(&mut self, i: usize, j: usize, record: bool) -> Vec<Vec<f64>> {
        let (li, lj) = (self.sp.lml[i], self.tp.lml[j]);
        let (nx, ny) = (i - li + 1, j - lj + 1);
        let mut fd = vec![vec![0.0; ny + 1]; nx + 1];
        for x in 1..=nx {
            fd[x][0] = fd[x - 1][0] + self.del(li + x - 1);
        }
        for y in 1..=ny {
            fd[0][y] = fd[0][y - 1] + self.ins(lj + y - 1);
        }
        for x in 1..=nx {
            let a = li + x - 1;
            for y in 1..=ny {
                let b = lj + y - 1;
                let drop = (fd[x - 1][y] + self.del(a)).min(fd[x][y - 1] + self.ins(b));
                if self.sp.lml[a] == li && self.tp.lml[b] == lj {
                    fd[x][y] = drop.min(fd[x - 1][y - 1] + self.rel(a, b));
                    if record {
                        self.td[a][b] = fd[x][y];
                    }
                } else {
                    let (px, py) = (self.sp.lml[a] - li, self.tp.lml[b] - lj);
                    fd[x][y] = drop.min(fd[px][py] + self.td[a][b]);
                }
            }
        }
        fd
    }

    pub fn distance(&self) -> f64 {
        self.td[self.sp.root()][self.tp.root()]
    }

    /// Backtracks one optimal mapping: relabel before delete before insert.
    pub fn alignment(&mut self) -> Alignment {
        let mut out = Alignment { cost: self.distance(), pairs: vec![], deleted: vec![], inserted: vec![] };
        let (i, j) = (self.sp.root(), self.tp.root());
        self.trace(i, j, &mut out);
        out.pairs.sort_unstable();
        out.deleted.sort_unstable();
        out.inserted.sort_unstable();
        out
    }

    fn trace(&mut self, i: usize, j: usize, out: &mut Alignment) {
        let fd = self.forest_table(i, j, false);
        let (li, lj) = (self.sp.lml[i], self.tp.lml[j]);
        let (mut x, mut y) = (i - li + 1, j - lj + 1);
        while x > 0 || y > 0 {
            let a = li + x.max(1) - 1;
            let b = lj + y.max(1) - 1;
            if x > 0 && y > 0 {
                if self.sp.lml[a] == li && self.tp.lml[b] == lj {
                    if close(fd[x][y], fd[x - 1][y - 1] + self.rel(a, b)) {
                        if let (Some(e), Some(f)) = (self.sp.node[a], self.tp.node[b]) {
                            out.pairs.push((e, f));
                        }
                        x -= 1;
                        y -= 1;
                        continue;
                    }
                } else {
                    let (px, py) = (self.sp.lml[a] - li, self.tp.lml[b] - lj);
                    if close(fd[x][y], fd[px][py] + self.td[a][b]) {
                        self.trace(a, b, out);
                        x = px;
                        y = py;
                        continue;
                    }
                }
            }
            if x > 0 && close(fd[x][y], fd[x - 1][y] + self.del(a)) {
                out.deleted.push(self.sp.node[a].unwrap());
                x -= 1;
            } else if y > 0 && close(fd[x][y], fd[x][y - 1] + self.ins(b)) {
                out.inserted.push(self.tp.node[b].unwrap());
                y -= 1;
            } else {
                unreachable!("edit distance backtracking lost the optimum");
            }
        }
    }
}
