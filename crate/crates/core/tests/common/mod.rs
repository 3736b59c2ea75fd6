//! Brute-force reference implementations shared by the integration tests.
//! They deliberately avoid the library's search code and use only the
//! basic tree accessors.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use treeshape::preshape_metrics::d2;
use treeshape::tree_model::{Attribute, CombinatorialTree, Layout, MaximalTree, TreeShape};

pub fn scalar(text: &str) -> TreeShape {
    TreeShape::from_bracket(Layout::scalar(), text).unwrap()
}

/// Random ordered forest with `1..=max_edges` edges and scalar attributes of
/// magnitude in `[0.1, 2]`.
pub fn random_scalar_shape(rng: &mut ChaCha8Rng, max_edges: usize) -> TreeShape {
    let m = rng.gen_range(1..=max_edges);
    let mut parent: Vec<Option<usize>> = vec![None];
    for e in 1..m {
        // a single root most of the time
        let p = if rng.gen_bool(0.85) { Some(rng.gen_range(0..e)) } else { None };
        parent.push(p);
    }
    let mut children = vec![Vec::new(); m];
    let mut roots = Vec::new();
    for (e, p) in parent.iter().enumerate() {
        match p {
            Some(q) => children[*q].push(e),
            None => roots.push(e),
        }
    }
    let (topo, idx) = CombinatorialTree::from_children(&roots, &children, None).unwrap();
    let layout = Layout::scalar();
    let mut attrs = vec![Attribute::zeros(layout); m];
    for e in 0..m {
        let mag = rng.gen_range(0.1..2.0);
        let sign = if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
        attrs[idx[e]] = Attribute::scalar(layout, sign * mag);
    }
    TreeShape::new(layout, topo, attrs, None).unwrap()
}

/// Balanced word of a forest: `(true, e)` opens edge `e`, `(false, e)` closes it.
pub fn word(t: &CombinatorialTree) -> Vec<(bool, usize)> {
    fn walk(t: &CombinatorialTree, e: usize, out: &mut Vec<(bool, usize)>) {
        out.push((true, e));
        for &c in t.children(e) {
            walk(t, c, out);
        }
        out.push((false, e));
    }
    let mut out = Vec::new();
    for &r in t.roots() {
        walk(t, r, &mut out);
    }
    out
}

fn ancestor(t: &CombinatorialTree, a: usize, b: usize) -> bool {
    let mut x = t.parent(b);
    while let Some(p) = x {
        if p == a {
            return true;
        }
        x = t.parent(p);
    }
    false
}

/// Tree edit distance with norm costs by enumerating every partial map
/// that preserves ancestry and left-to-right order.
pub fn ted_bruteforce(s: &TreeShape, t: &TreeShape) -> f64 {
    let (ts, tt) = (s.topology(), t.topology());
    let (m, n) = (s.len(), t.len());
    let pre = |x: &CombinatorialTree| -> Vec<usize> {
        let mut pos = vec![0; x.len()];
        for (i, (_, e)) in word(x).into_iter().filter(|w| w.0).enumerate() {
            pos[e] = i;
        }
        pos
    };
    let (ps, pt) = (pre(ts), pre(tt));
    let mut best = f64::INFINITY;
    let mut map: Vec<(usize, usize)> = Vec::new();
    fn rec(
        e: usize,
        s: &TreeShape,
        t: &TreeShape,
        ps: &[usize],
        pt: &[usize],
        used: &mut Vec<bool>,
        map: &mut Vec<(usize, usize)>,
        best: &mut f64,
    ) {
        let (ts, tt) = (s.topology(), t.topology());
        if e == s.len() {
            let mut cost = 0.0;
            let mut hit_s = vec![false; s.len()];
            for &(a, b) in map.iter() {
                cost += s.attr(a).dist(t.attr(b));
                hit_s[a] = true;
            }
            for a in 0..s.len() {
                if !hit_s[a] {
                    cost += s.attr(a).norm();
                }
            }
            for b in 0..t.len() {
                if !used[b] {
                    cost += t.attr(b).norm();
                }
            }
            *best = best.min(cost);
            return;
        }
        rec(e + 1, s, t, ps, pt, used, map, best);
        for f in 0..t.len() {
            if used[f] {
                continue;
            }
            let ok = map.iter().all(|&(a, b)| {
                let anc = ancestor(ts, a, e) == ancestor(tt, b, f) && ancestor(ts, e, a) == ancestor(tt, f, b);
                let left_s = ps[a] < ps[e] && !ancestor(ts, a, e);
                let left_t = pt[b] < pt[f] && !ancestor(tt, b, f);
                anc && left_s == left_t
            });
            if ok {
                used[f] = true;
                map.push((e, f));
                rec(e + 1, s, t, ps, pt, used, map, best);
                map.pop();
                used[f] = false;
            }
        }
    }
    let mut used = vec![false; n];
    let _ = m;
    rec(0, s, t, &ps, &pt, &mut used, &mut map, &mut best);
    best
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Tag {
    S(usize),
    T(usize),
    M(usize, usize),
}

/// Best single Euclidean stretch without capacity limits: the joint tree's
/// word is a merge of both words in which a matched pair of edges opens and
/// closes simultaneously.
pub fn single_stretch_shuffle(s: &TreeShape, t: &TreeShape) -> f64 {
    let (ws, wt) = (word(s.topology()), word(t.topology()));
    let mut memo: HashMap<(usize, usize, Vec<Tag>), f64> = HashMap::new();
    fn go(
        i: usize,
        j: usize,
        stack: &mut Vec<Tag>,
        ws: &[(bool, usize)],
        wt: &[(bool, usize)],
        s: &TreeShape,
        t: &TreeShape,
        memo: &mut HashMap<(usize, usize, Vec<Tag>), f64>,
    ) -> f64 {
        if i == ws.len() && j == wt.len() && stack.is_empty() {
            return 0.0;
        }
        let key = (i, j, stack.clone());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let mut best = f64::INFINITY;
        let ns = ws.get(i).copied();
        let nt = wt.get(j).copied();
        if let Some((true, e)) = ns {
            stack.push(Tag::S(e));
            best = best.min(s.attr(e).norm_sq() + go(i + 1, j, stack, ws, wt, s, t, memo));
            stack.pop();
        }
        if let Some((true, f)) = nt {
            stack.push(Tag::T(f));
            best = best.min(t.attr(f).norm_sq() + go(i, j + 1, stack, ws, wt, s, t, memo));
            stack.pop();
        }
        if let (Some((true, e)), Some((true, f))) = (ns, nt) {
            stack.push(Tag::M(e, f));
            best = best.min(s.attr(e).dist_sq(t.attr(f)) + go(i + 1, j + 1, stack, ws, wt, s, t, memo));
            stack.pop();
        }
        if let Some(&top) = stack.last() {
            let next = match top {
                Tag::S(e) if ns == Some((false, e)) => Some((i + 1, j)),
                Tag::T(f) if nt == Some((false, f)) => Some((i, j + 1)),
                Tag::M(e, f) if ns == Some((false, e)) && nt == Some((false, f)) => Some((i + 1, j + 1)),
                _ => None,
            };
            if let Some((a, b)) = next {
                stack.pop();
                best = best.min(go(a, b, stack, ws, wt, s, t, memo));
                stack.push(top);
            }
        }
        memo.insert(key, best);
        best
    }
    go(0, 0, &mut Vec::new(), &ws, &wt, s, t, &mut memo).sqrt()
}

/// Best single stretch between representatives on the maximal tree of the
/// given depth, by enumerating every pair of representatives.
pub fn single_stretch_representatives(s: &TreeShape, t: &TreeShape, depth: usize) -> f64 {
    let mt = MaximalTree::new(depth).unwrap();
    let (rs, rt) = match (s.representatives(mt), t.representatives(mt)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return f64::INFINITY,
    };
    let mut best = f64::INFINITY;
    for x in &rs {
        for y in &rt {
            best = best.min(d2(x, y).unwrap());
        }
    }
    best
}

/// One two-stretch crossing in oracle form.
pub struct Crossing {
    pub value: f64,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    keep_s: Vec<bool>,
    keep_t: Vec<bool>,
}

impl Crossing {
    /// The intermediate tree at the optimal parameter.
    pub fn w(&self, s: &TreeShape, t: &TreeShape) -> TreeShape {
        let (_, ys) = restricted(s.topology(), &self.keep_s);
        let (_, yt) = restricted(t.topology(), &self.keep_t);
        grown_tree(s, t, &self.keep_s, &self.keep_t, &ys, &yt, self.tau)
    }
}

fn contains_kept(t: &CombinatorialTree, e: usize, keep: &[bool]) -> bool {
    t.children(e).iter().any(|&c| keep[c] || contains_kept(t, c, keep))
}

/// Structure of the word restricted to kept edges, and the kept edges in order.
fn restricted(t: &CombinatorialTree, keep: &[bool]) -> (Vec<bool>, Vec<usize>) {
    let w: Vec<(bool, usize)> = word(t).into_iter().filter(|&(_, e)| keep[e]).collect();
    (w.iter().map(|x| x.0).collect(), w.iter().filter(|x| x.0).map(|x| x.1).collect())
}

fn max_degree(structure: &[bool]) -> usize {
    // children per open vertex, root vertex included
    let mut counts = vec![0usize];
    let mut best = 0;
    for &open in structure {
        if open {
            *counts.last_mut().unwrap() += 1;
            counts.push(0);
        } else {
            best = best.max(counts.pop().unwrap());
        }
    }
    best.max(counts[0])
}

fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Every two-stretch crossing with common contraction degree at most `degree`,
/// minimized over a 1e-3 grid of the segment parameter and refined by
/// golden-section search.
pub fn two_stretch_crossings(s: &TreeShape, t: &TreeShape, degree: usize) -> Vec<Crossing> {
    let (ts, tt) = (s.topology(), t.topology());
    let (m, n) = (s.len(), t.len());
    let mut out = Vec::new();
    for ms in 0u32..1 << m {
        let ks: Vec<bool> = (0..m).map(|e| ms >> e & 1 == 1).collect();
        let (shape_s, ys) = restricted(ts, &ks);
        if max_degree(&shape_s) > degree {
            continue;
        }
        for mt in 0u32..1 << n {
            let kt: Vec<bool> = (0..n).map(|f| mt >> f & 1 == 1).collect();
            let (shape_t, yt) = restricted(tt, &kt);
            if shape_s != shape_t {
                continue;
            }
            // coordinates: shared pairs, then source externals, then target externals
            let mut p: Vec<f64> = Vec::new();
            let mut q: Vec<f64> = Vec::new();
            for (&e, &f) in ys.iter().zip(&yt) {
                p.extend_from_slice(s.attr(e).coords());
                q.extend_from_slice(t.attr(f).coords());
            }
            let (mut a, mut b) = (0.0, 0.0);
            for e in 0..m {
                if ks[e] {
                    continue;
                }
                if contains_kept(ts, e, &ks) {
                    a += s.attr(e).norm_sq();
                } else {
                    p.extend_from_slice(s.attr(e).coords());
                    q.extend(std::iter::repeat(0.0).take(s.attr(e).coords().len()));
                }
            }
            for f in 0..n {
                if kt[f] {
                    continue;
                }
                if contains_kept(tt, f, &kt) {
                    b += t.attr(f).norm_sq();
                } else {
                    p.extend(std::iter::repeat(0.0).take(t.attr(f).coords().len()));
                    q.extend_from_slice(t.attr(f).coords());
                }
            }
            let objective = |tau: f64| {
                let (mut l1, mut l2) = (a, b);
                for k in 0..p.len() {
                    let z = p[k] + tau * (q[k] - p[k]);
                    l1 += (p[k] - z).powi(2);
                    l2 += (q[k] - z).powi(2);
                }
                l1.sqrt() + l2.sqrt()
            };
            let mut g = 0;
            for i in 1..=1000 {
                if objective(i as f64 / 1000.0) < objective(g as f64 / 1000.0) {
                    g = i;
                }
            }
            let lo = (g as f64 - 1.0).max(0.0) / 1000.0;
            let hi = (g as f64 + 1.0).min(1000.0) / 1000.0;
            let tau = golden(objective, lo, hi);
            let value = objective(tau).min(objective(g as f64 / 1000.0));
            out.push(Crossing { value, tau, a, b, keep_s: ks.clone(), keep_t: kt });
        }
    }
    out
}

/// The intermediate tree: shared edges plus externals of both sides, with
/// the source's externals before the target's within every gap between
/// consecutive shared symbols.
fn grown_tree(
    s: &TreeShape,
    t: &TreeShape,
    ks: &[bool],
    kt: &[bool],
    ys: &[usize],
    yt: &[usize],
    tau: f64,
) -> TreeShape {
    #[derive(Clone, Copy, PartialEq)]
    enum Sym {
        Shared(usize),
        Src(usize),
        Tgt(usize),
    }
    let gaps = |tree: &CombinatorialTree, keep: &[bool], own: fn(usize) -> Sym| {
        let mut g: Vec<Vec<(bool, Sym)>> = vec![Vec::new()];
        let mut shared = Vec::new();
        for (open, e) in word(tree) {
            if keep[e] {
                shared.push(open);
                g.push(Vec::new());
            } else if !contains_kept(tree, e, keep) {
                g.last_mut().unwrap().push((open, own(e)));
            }
        }
        (g, shared)
    };
    let (gs, opens) = gaps(s.topology(), ks, Sym::Src);
    let (gt, _) = gaps(t.topology(), kt, Sym::Tgt);
    let mut w: Vec<(bool, Sym)> = Vec::new();
    let mut k = 0;
    let mut stack = Vec::new();
    for (i, &open) in opens.iter().enumerate() {
        w.extend(gs[i].iter().copied());
        w.extend(gt[i].iter().copied());
        if open {
            w.push((true, Sym::Shared(k)));
            stack.push(k);
            k += 1;
        } else {
            w.push((false, Sym::Shared(stack.pop().unwrap())));
        }
    }
    w.extend(gs[opens.len()].iter().copied());
    w.extend(gt[opens.len()].iter().copied());
    // rebuild the forest from the word
    let layout = s.layout();
    let mut syms = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut st: Vec<usize> = Vec::new();
    for (open, sym) in w {
        if open {
            parent.push(st.last().copied());
            st.push(syms.len());
            syms.push(sym);
        } else {
            st.pop();
        }
    }
    let cnt = syms.len();
    let mut children = vec![Vec::new(); cnt];
    let mut roots = Vec::new();
    for (e, p) in parent.iter().enumerate() {
        match p {
            Some(q) => children[*q].push(e),
            None => roots.push(e),
        }
    }
    let (topo, idx) = CombinatorialTree::from_children(&roots, &children, None).unwrap();
    let mut attrs = vec![Attribute::zeros(layout); cnt];
    for (e, sym) in syms.iter().enumerate() {
        let (p, q) = match *sym {
            Sym::Shared(k) => (s.attr(ys[k]).clone(), t.attr(yt[k]).clone()),
            Sym::Src(x) => (s.attr(x).clone(), Attribute::zeros(layout)),
            Sym::Tgt(y) => (Attribute::zeros(layout), t.attr(y).clone()),
        };
        attrs[idx[e]] = p.lerp(&q, tau);
    }
    TreeShape::from_parts_collapsing(layout, topo, attrs, None).unwrap()
}

pub fn oracle_d1(s: &TreeShape, t: &TreeShape) -> f64 {
    if s == t {
        return 0.0;
    }
    single_stretch_shuffle(s, t)
}

pub fn oracle_d2(s: &TreeShape, t: &TreeShape, degree: usize) -> f64 {
    let one = oracle_d1(s, t);
    two_stretch_crossings(s, t, degree).iter().map(|c| c.value).fold(one, f64::min)
}

/// `d_3` as the best of `d_2` and paths split at an intermediate tree of a
/// crossing that collapses on both sides, with one single-stretch leg.
pub fn oracle_d3(s: &TreeShape, t: &TreeShape, degree: usize) -> f64 {
    let (a, b) = if t < s { (t, s) } else { (s, t) };
    let mut best = oracle_d2(a, b, degree);
    for c in two_stretch_crossings(a, b, degree) {
        if c.a > 0.0 && c.b > 0.0 {
            let w = &c.w(a, b);
            best = best.min(oracle_d1(a, w) + oracle_d2(w, b, degree));
            best = best.min(oracle_d2(a, w, degree) + oracle_d1(w, b));
        }
    }
    best
}

/// A pair of trees built from a common base by grouping two different runs
/// of siblings under a short new edge, with jittered shared attributes. This
/// is the regime where paths through a lower-dimensional tree pay off.
pub fn regrouped_pair(rng: &mut ChaCha8Rng, max_k: usize, grandchildren: bool) -> (TreeShape, TreeShape) {
    let k = rng.gen_range(3..=max_k);
    let base: Vec<f64> = (0..k + 1).map(|_| rng.gen_range(0.5..2.0)).collect();
    let extra = grandchildren && k == 3;
    let extra_vals = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
    let mut runs = Vec::new();
    for i in 0..k {
        for j in i + 2..=k {
            if j - i < k {
                runs.push((i, j));
            }
        }
    }
    let build = |run: (usize, usize), rng: &mut ChaCha8Rng| {
        let jit = |v: f64, rng: &mut ChaCha8Rng| v + rng.gen_range(-0.2..0.2);
        let mut vals = vec![jit(base[0], rng)];
        let mut parent: Vec<Option<usize>> = vec![None];
        // the grouping edge, index 1
        vals.push(rng.gen_range(0.05..0.8));
        parent.push(Some(0));
        for c in 0..k {
            vals.push(jit(base[c + 1], rng));
            parent.push(Some(if c >= run.0 && c < run.1 { 1 } else { 0 }));
        }
        if extra {
            let host = 2;
            for v in extra_vals {
                vals.push(jit(v, rng));
                parent.push(Some(host));
            }
        }
        let m = vals.len();
        let mut children = vec![Vec::new(); m];
        // children of the root edge in base order, grouping edge at its run
        for c in 0..k {
            if c == run.0 {
                children[0].push(1);
            }
            if c < run.0 || c >= run.1 {
                children[0].push(c + 2);
            } else {
                children[1].push(c + 2);
            }
        }
        for e in k + 2..m {
            children[parent[e].unwrap()].push(e);
        }
        let (topo, idx) = CombinatorialTree::from_children(&[0], &children, None).unwrap();
        let layout = Layout::scalar();
        let mut attrs = vec![Attribute::zeros(layout); m];
        for e in 0..m {
            attrs[idx[e]] = Attribute::scalar(layout, vals[e]);
        }
        TreeShape::new(layout, topo, attrs, None).unwrap()
    };
    let a = runs[rng.gen_range(0..runs.len())];
    let mut b = runs[rng.gen_range(0..runs.len())];
    while runs.len() > 1 && b == a {
        b = runs[rng.gen_range(0..runs.len())];
    }
    let s = build(a, rng);
    let t = build(b, rng);
    (s, t)
}

/// Bracket notation of a scalar shape, the inverse of [`scalar`].
pub fn bracket(s: &TreeShape) -> String {
    fn edge(s: &TreeShape, e: usize) -> String {
        let v = s.attr(e).coords()[0];
        let ch = s.topology().children(e);
        if ch.is_empty() {
            format!("{v}")
        } else {
            format!("{v}[{}]", ch.iter().map(|&c| edge(s, c)).collect::<Vec<_>>().join(","))
        }
    }
    s.topology().roots().iter().map(|&r| edge(s, r)).collect::<Vec<_>>().join(",")
}
