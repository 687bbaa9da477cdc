//! Coset enumeration (Todd-Coxeter, HLT strategy with lookahead) over a
//! finite presentation, and realization of the enumerated group either as a
//! dense Cayley table or as a permutation-column backed structured group.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{ElemId, GroupView, PresentedBy, StructuredOps};
use crate::presentation::Presentation;
use crate::words::Word;

pub const DEFAULT_MAX_COSETS: usize = 2_000_000;

const UNDEF: u32 = u32::MAX;

/// A completed coset table over the subgroup generated by `subgens`
/// (trivial subgroup = regular representation).
pub struct CosetTable {
    /// `table[coset * (2*ngens) + col]`, columns ordered g0, g0^-1, g1, ...
    table: Vec<u32>,
    ngens: usize,
    pub num_cosets: usize,
}

#[inline]
fn col(gen: usize, exp_negative: bool) -> usize {
    2 * gen + exp_negative as usize
}

struct Enumerator {
    width: usize,
    table: Vec<u32>,     // row-major, UNDEF for unknown
    parent: Vec<u32>,    // union-find over cosets
    alive: usize,
    defined: usize,
    max_cosets: usize,
    queue: std::collections::VecDeque<(u32, u32)>, // coincidence queue
}

impl Enumerator {
    fn new(ngens: usize, max_cosets: usize) -> Self {
        let width = 2 * ngens;
        Enumerator {
            width,
            table: vec![UNDEF; width],
            parent: vec![0],
            alive: 1,
            defined: 1,
            max_cosets,
            queue: Default::default(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn entry(&self, c: u32, col: usize) -> u32 {
        self.table[c as usize * self.width + col]
    }

    fn set(&mut self, c: u32, col: usize, v: u32) {
        self.table[c as usize * self.width + col] = v;
    }

    fn define(&mut self, c: u32, col: usize) -> Result<u32> {
        if self.defined >= self.max_cosets {
            return Err(Error::Overflowed { max_cosets: self.max_cosets });
        }
        let d = self.parent.len() as u32;
        self.parent.push(d);
        self.table.extend(std::iter::repeat(UNDEF).take(self.width));
        self.deduce(c, col, d);
        self.alive += 1;
        self.defined += 1;
        Ok(d)
    }

    /// Record c * g = d (and d * g^-1 = c), queuing a coincidence on clash.
    fn deduce(&mut self, c: u32, col_idx: usize, d: u32) {
        let inv_col = col_idx ^ 1;
        let cur = self.entry(c, col_idx);
        if cur == UNDEF {
            self.set(c, col_idx, d);
        } else if cur != d {
            self.queue.push_back((cur, d));
        }
        let cur = self.entry(d, inv_col);
        if cur == UNDEF {
            self.set(d, inv_col, c);
        } else if cur != c {
            self.queue.push_back((cur, c));
        }
    }

    fn process_coincidences(&mut self) {
        while let Some((a, b)) = self.queue.pop_front() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (keep, kill) = if a < b { (a, b) } else { (b, a) };
            self.parent[kill as usize] = keep;
            self.alive -= 1;
            // fold the dead row into the kept row
            for col_idx in 0..self.width {
                let v = self.entry(kill, col_idx);
                if v != UNDEF {
                    let v = self.find(v);
                    let keep2 = self.find(keep);
                    self.deduce(keep2, col_idx, v);
                }
            }
        }
    }

    /// Scan a relator at coset c: walk forward as far as possible, backward
    /// from the end, and close the gap (deducing or defining per `fill`).
    fn scan(&mut self, c: u32, cols: &[usize], fill: bool) -> Result<()> {
        let mut f = c;
        let mut i = 0;
        while i < cols.len() {
            let next = self.entry(f, cols[i]);
            if next == UNDEF {
                break;
            }
            f = self.find(next);
            i += 1;
        }
        if i == cols.len() {
            if f != c {
                self.queue.push_back((f, c));
            }
            return Ok(());
        }
        let mut b = c;
        let mut j = cols.len();
        while j > i {
            let next = self.entry(b, cols[j - 1] ^ 1);
            if next == UNDEF {
                break;
            }
            b = self.find(next);
            j -= 1;
        }
        if j == i {
            // forward and backward meet head-on: f * cols[i..j] is empty,
            // so f and b must coincide -- but j==i means full overlap; the
            // gap is zero letters, f should equal b.
            if f != b {
                self.queue.push_back((f, b));
            }
        } else if j == i + 1 {
            // single-letter gap: deduction
            self.deduce(f, cols[i], b);
        } else if fill {
            let d = self.define(f, cols[i])?;
            self.process_coincidences();
            // re-scan from scratch (cheap, relators are short)
            let c2 = self.find(c);
            let _ = d;
            return self.scan(c2, cols, fill);
        }
        Ok(())
    }
}

fn relator_cols(w: &Word) -> Vec<usize> {
    let mut cols = Vec::new();
    for &(g, e) in w.syllables() {
        let (n, neg) = if e < 0 { ((-e) as usize, true) } else { (e as usize, false) };
        for _ in 0..n {
            cols.push(col(g, neg));
        }
    }
    cols
}

/// Enumerate cosets of `<subgens>` in the presented group.  `subgens`
/// empty gives the regular representation (cosets = elements).
pub fn enumerate(
    p: &Presentation,
    subgens: &[Word],
    max_cosets: usize,
) -> Result<CosetTable> {
    let ngens = p.gens().len();
    let mut e = Enumerator::new(ngens, max_cosets);
    let rel_cols: Vec<Vec<usize>> = p.relators().iter().map(relator_cols).collect();

    // subgroup generators fix coset 0
    for sg in subgens {
        e.scan(0, &relator_cols(sg), true)?;
        e.process_coincidences();
    }

    let mut c_scan = 0u32;
    loop {
        // advance past dead cosets
        while (c_scan as usize) < e.parent.len() && e.find(c_scan) != c_scan {
            c_scan += 1;
        }
        if c_scan as usize >= e.parent.len() {
            break;
        }
        for cols in &rel_cols {
            let c = e.find(c_scan);
            if c != c_scan {
                break;
            }
            e.scan(c, cols, true)?;
            e.process_coincidences();
        }
        if e.find(c_scan) == c_scan {
            // ensure the row is complete (HLT fill)
            for col_idx in 0..e.width {
                let c = e.find(c_scan);
                if c != c_scan {
                    break;
                }
                if e.entry(c, col_idx) == UNDEF {
                    e.define(c, col_idx)?;
                    e.process_coincidences();
                }
            }
        }
        c_scan += 1;
    }

    // compact live cosets
    let mut remap = vec![UNDEF; e.parent.len()];
    let mut live = 0u32;
    for i in 0..e.parent.len() as u32 {
        if e.find(i) == i {
            remap[i as usize] = live;
            live += 1;
        }
    }
    let width = e.width;
    let mut table = vec![UNDEF; live as usize * width];
    for i in 0..e.parent.len() as u32 {
        if remap[i as usize] == UNDEF {
            continue;
        }
        let row = remap[i as usize] as usize;
        for c in 0..width {
            let v = e.entry(i, c);
            assert_ne!(v, UNDEF, "incomplete coset table after enumeration");
            table[row * width + c] = remap[e.find(v) as usize];
        }
    }
    Ok(CosetTable { table, ngens, num_cosets: live as usize })
}

impl CosetTable {
    #[inline]
    pub fn act(&self, coset: u32, gen: usize, inverse: bool) -> u32 {
        self.table[coset as usize * 2 * self.ngens + col(gen, inverse)]
    }

    /// Trace a word from a coset.
    pub fn trace(&self, mut coset: u32, w: &Word) -> u32 {
        for &(g, e) in w.syllables() {
            let (n, neg) = if e < 0 { ((-e) as usize, true) } else { (e as usize, false) };
            for _ in 0..n {
                coset = self.act(coset, g, neg);
            }
        }
        coset
    }
}

/// Permutation-column backed group: element ids are cosets of the regular
/// representation, each with a defining word in the generators.  `mult(a,b)`
/// traces b's definition word starting from a.
pub struct CosetGroup {
    table: Arc<CosetTable>,
    /// definition of each coset as (parent coset, column); coset 0 is root
    defs: Vec<(u32, u16)>,
}

impl CosetGroup {
    fn def_path(&self, mut c: u32, out: &mut Vec<u16>) {
        out.clear();
        while c != 0 {
            let (p, col_idx) = self.defs[c as usize];
            out.push(col_idx);
            c = p;
        }
        out.reverse();
    }
}

impl StructuredOps for CosetGroup {
    fn order(&self) -> usize {
        self.table.num_cosets
    }

    fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        // a * b = trace definition word of b from coset a
        let mut path = Vec::with_capacity(16);
        self.def_path(b, &mut path);
        let ngens = self.table.ngens;
        let mut c = a;
        for &col_idx in &path {
            c = self.table.table[c as usize * 2 * ngens + col_idx as usize];
        }
        c
    }

    fn kind(&self) -> &'static str {
        "coset"
    }
}

/// Realize a presented group: enumerate the regular representation and wrap
/// it as a [`GroupView`] (dense if at most `dense_cutoff` elements).
pub fn realize(p: &Presentation, max_cosets: usize, dense_cutoff: usize) -> Result<GroupView> {
    let ct = enumerate(p, &[], max_cosets)?;
    let n = ct.num_cosets;
    let ngens = p.gens().len();

    // generator ids: coset 0 acted by each generator
    let gen_ids: Vec<ElemId> = (0..ngens).map(|g| ct.act(0, g, false)).collect();
    let mut gens: Vec<ElemId> = gen_ids.clone();
    gens.retain(|&g| g != 0);
    gens.dedup();

    let view = if n <= dense_cutoff {
        // definition-word per coset via BFS, then fill dense table by tracing
        let defs = definition_tree(&ct);
        let mut table = vec![0u32; n * n];
        let mut path = Vec::new();
        for b in 0..n as u32 {
            path.clear();
            let mut c = b;
            while c != 0 {
                let (pr, cl) = defs[c as usize];
                path.push(cl);
                c = pr;
            }
            path.reverse();
            for a in 0..n as u32 {
                let mut x = a;
                for &cl in &path {
                    x = ct.table[x as usize * 2 * ngens + cl as usize];
                }
                table[a as usize * n + b as usize] = x;
            }
        }
        GroupView::from_dense(table, gens, presentation_desc(p))
    } else {
        let defs = definition_tree(&ct);
        let ops = Arc::new(CosetGroup { table: Arc::new(ct), defs });
        GroupView::from_structured(ops, gens, presentation_desc(p))
    };
    Ok(view.with_presentation(PresentedBy { presentation: p.clone(), gen_ids }))
}

fn presentation_desc(p: &Presentation) -> String {
    format!("<{}; {} rels>", p.gens().join(","), p.relators().len())
}

/// BFS spanning tree of the coset graph: for each coset a (parent, column)
/// pair defining it from coset 0.
fn definition_tree(ct: &CosetTable) -> Vec<(u32, u16)> {
    let n = ct.num_cosets;
    let mut defs = vec![(UNDEF, 0u16); n];
    defs[0] = (0, 0);
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(c) = queue.pop_front() {
        for g in 0..ct.ngens {
            for inv in [false, true] {
                let d = ct.act(c, g, inv);
                if !seen[d as usize] {
                    seen[d as usize] = true;
                    defs[d as usize] = (c, col(g, inv) as u16);
                    queue.push_back(d);
                }
            }
        }
    }
    defs
}

/// Evaluate a word at given element ids in a realized group.
pub fn eval_word(g: &GroupView, gen_ids: &[ElemId], w: &Word) -> ElemId {
    let mut acc = 0;
    for &(i, e) in w.syllables() {
        acc = g.mult(acc, g.pow(gen_ids[i], e));
    }
    acc
}

/// Von Dyck check: candidate generator images in `target` define a
/// homomorphism from the presented group iff every relator maps to the
/// identity.
pub fn satisfies_relators(p: &Presentation, target: &GroupView, images: &[ElemId]) -> bool {
    p.relators().iter().all(|r| eval_word(target, images, r) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DENSE_CUTOFF;
    use crate::presentation::parse_presentation;

    fn realize_text(text: &str) -> GroupView {
        realize(&parse_presentation(text).unwrap(), DEFAULT_MAX_COSETS, DENSE_CUTOFF).unwrap()
    }

    #[test]
    fn cyclic_7() {
        let g = realize_text("gens: a\nrels: a^7");
        assert_eq!(g.order(), 7);
        assert!(g.is_abelian());
    }

    #[test]
    fn dihedral_8_and_center() {
        let g = realize_text("gens: a b\nrels: a^4, b^2, (a*b)^2");
        assert_eq!(g.order(), 8);
        assert!(!g.is_abelian());
        assert_eq!(crate::group::center(&g).order(), 2);
    }

    #[test]
    fn quaternion_8() {
        let g = realize_text("gens: a b\nrels: a^4, a^2 = b^2, a^b = a^-1");
        assert_eq!(g.order(), 8);
        // Q8 has a unique involution
        let invols = g.elements().filter(|&x| x != 0 && g.mult(x, x) == 0).count();
        assert_eq!(invols, 1);
    }

    #[test]
    fn sym4_from_coxeter_like_presentation() {
        let g = realize_text("gens: s t\nrels: s^2, t^3, (s*t)^4");
        assert_eq!(g.order(), 24);
        assert_eq!(crate::group::derived_subgroup(&g).order(), 12);
    }

    #[test]
    fn subgroup_index_enumeration() {
        // index of <s> in Sym3 = 3
        let p = parse_presentation("gens: s t\nrels: s^2, t^3, (s*t)^2").unwrap();
        let sub = vec![crate::words::Word::generator(0)];
        let ct = enumerate(&p, &sub, DEFAULT_MAX_COSETS).unwrap();
        assert_eq!(ct.num_cosets, 3);
    }

    #[test]
    fn coset_group_backend_matches_dense() {
        let p = parse_presentation("gens: a b\nrels: a^6, b^2, (a*b)^2").unwrap();
        let dense = realize(&p, DEFAULT_MAX_COSETS, DENSE_CUTOFF).unwrap();
        let structured = realize(&p, DEFAULT_MAX_COSETS, 0).unwrap();
        assert_eq!(dense.order(), 12);
        assert_eq!(structured.order(), 12);
        for a in dense.elements() {
            for b in dense.elements() {
                assert_eq!(dense.mult(a, b), structured.mult(a, b));
            }
        }
    }

    #[test]
    fn relator_satisfaction() {
        let p = parse_presentation("gens: a\nrels: a^4").unwrap();
        let g = realize(&p, DEFAULT_MAX_COSETS, DENSE_CUTOFF).unwrap();
        let ids = g.presented_by().unwrap().gen_ids.clone();
        assert!(satisfies_relators(&p, &g, &ids));
        // a |-> a has order 4; mapping a to an element of order != dividing 4 fails
        let bad = g.elements().find(|&x| g.element_order(x) == 3);
        assert!(bad.is_none() || !satisfies_relators(&p, &g, &[bad.unwrap()]));
    }
}
