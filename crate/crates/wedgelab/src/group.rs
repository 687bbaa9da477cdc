//! Uniform finite-group representation with dense (Cayley table) and
//! structured (lazily multiplied) backends, plus subgroup, quotient,
//! morphism, and abelian-invariant machinery.
//!
//! Element ids are `0..order` with id 0 the identity; ids are assigned
//! deterministically by each constructor so repeated runs agree.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presentation::Presentation;

pub type ElemId = u32;

/// Default cutoff below which groups are materialized as dense Cayley tables.
pub const DENSE_CUTOFF: usize = 5000;

/// Safety cap for structured-closure computations.
pub const CLOSURE_BUDGET: usize = 8_000_000;

/// Operations a structured backend must provide.  Everything else
/// (inversion, powers, orders) is derived.
pub trait StructuredOps: Send + Sync {
    fn order(&self) -> usize;
    fn mult(&self, a: ElemId, b: ElemId) -> ElemId;
    fn kind(&self) -> &'static str;
    /// Backends that can invert cheaply may override.
    fn inv_hint(&self, _a: ElemId) -> Option<ElemId> {
        None
    }
}

enum Backend {
    Dense { table: Vec<ElemId>, inv: Vec<ElemId> },
    Structured(Arc<dyn StructuredOps>),
}

/// A presentation attached to a realized group, with the element ids the
/// abstract generators map to.  Used for von Dyck style checks.
#[derive(Clone)]
pub struct PresentedBy {
    pub presentation: Presentation,
    pub gen_ids: Vec<ElemId>,
}

struct Inner {
    order: usize,
    generators: Vec<ElemId>,
    backend: Backend,
    desc: String,
    presented_by: Option<PresentedBy>,
}

/// A finite group with canonical element ids `0..order`, id 0 = identity.
/// Cheap to clone (shared backend).
#[derive(Clone)]
pub struct GroupView {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for GroupView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupView({}, order {})", self.inner.desc, self.inner.order)
    }
}

impl GroupView {
    pub fn from_dense(table: Vec<ElemId>, generators: Vec<ElemId>, desc: impl Into<String>) -> Self {
        let order = (table.len() as f64).sqrt().round() as usize;
        assert_eq!(order * order, table.len());
        let mut inv = vec![ElemId::MAX; order];
        for a in 0..order {
            for b in 0..order {
                if table[a * order + b] == 0 {
                    inv[a] = b as ElemId;
                }
            }
        }
        GroupView {
            inner: Arc::new(Inner {
                order,
                generators,
                backend: Backend::Dense { table, inv },
                desc: desc.into(),
                presented_by: None,
            }),
        }
    }

    pub fn from_structured(
        ops: Arc<dyn StructuredOps>,
        generators: Vec<ElemId>,
        desc: impl Into<String>,
    ) -> Self {
        let order = ops.order();
        GroupView {
            inner: Arc::new(Inner {
                order,
                generators,
                backend: Backend::Structured(ops),
                desc: desc.into(),
                presented_by: None,
            }),
        }
    }

    pub fn with_presentation(self, p: PresentedBy) -> Self {
        let mut inner = match Arc::try_unwrap(self.inner) {
            Ok(i) => i,
            Err(arc) => Inner {
                order: arc.order,
                generators: arc.generators.clone(),
                backend: match &arc.backend {
                    Backend::Dense { table, inv } => {
                        Backend::Dense { table: table.clone(), inv: inv.clone() }
                    }
                    Backend::Structured(ops) => Backend::Structured(ops.clone()),
                },
                desc: arc.desc.clone(),
                presented_by: arc.presented_by.clone(),
            },
        };
        inner.presented_by = Some(p);
        GroupView { inner: Arc::new(inner) }
    }

    /// The trivial group.
    pub fn trivial() -> Self {
        GroupView::from_dense(vec![0], vec![], "1")
    }

    pub fn order(&self) -> usize {
        self.inner.order
    }

    pub fn desc(&self) -> &str {
        &self.inner.desc
    }

    pub fn generators(&self) -> &[ElemId] {
        &self.inner.generators
    }

    pub fn presented_by(&self) -> Option<&PresentedBy> {
        self.inner.presented_by.as_ref()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.inner.backend, Backend::Dense { .. })
    }

    pub fn backend_kind(&self) -> &'static str {
        match &self.inner.backend {
            Backend::Dense { .. } => "dense",
            Backend::Structured(ops) => ops.kind(),
        }
    }

    #[inline]
    pub fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        match &self.inner.backend {
            Backend::Dense { table, .. } => table[a as usize * self.inner.order + b as usize],
            Backend::Structured(ops) => ops.mult(a, b),
        }
    }

    pub fn inv(&self, a: ElemId) -> ElemId {
        match &self.inner.backend {
            Backend::Dense { inv, .. } => inv[a as usize],
            Backend::Structured(ops) => {
                if let Some(i) = ops.inv_hint(a) {
                    return i;
                }
                // a^(order(a)-1)
                if a == 0 {
                    return 0;
                }
                let mut prev = a;
                let mut cur = self.mult(a, a);
                while cur != 0 {
                    prev = cur;
                    cur = self.mult(cur, a);
                }
                prev
            }
        }
    }

    pub fn pow(&self, a: ElemId, k: i64) -> ElemId {
        let (mut base, mut e) = if k < 0 { (self.inv(a), (-k) as u64) } else { (a, k as u64) };
        let mut acc = 0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mult(acc, base);
            }
            base = self.mult(base, base);
            e >>= 1;
        }
        acc
    }

    /// Conjugate x^g = g^-1 x g.
    pub fn conj(&self, x: ElemId, g: ElemId) -> ElemId {
        self.mult(self.mult(self.inv(g), x), g)
    }

    /// Commutator [x,y] = x^-1 y^-1 x y.
    pub fn comm(&self, x: ElemId, y: ElemId) -> ElemId {
        self.mult(self.mult(self.inv(x), self.inv(y)), self.mult(x, y))
    }

    pub fn element_order(&self, a: ElemId) -> u64 {
        let mut ord = 1u64;
        let mut cur = a;
        while cur != 0 {
            cur = self.mult(cur, a);
            ord += 1;
        }
        ord
    }

    pub fn elements(&self) -> std::ops::Range<ElemId> {
        0..self.inner.order as ElemId
    }

    pub fn is_abelian(&self) -> bool {
        let gens = self.generators();
        gens.iter().all(|&x| gens.iter().all(|&y| self.mult(x, y) == self.mult(y, x)))
    }

    /// Materialize any backend as a dense Cayley table (same element ids).
    pub fn materialize_dense(&self, cutoff: usize) -> Result<GroupView> {
        let n = self.order();
        if n > cutoff {
            return Err(Error::BudgetExceeded { what: format!("densifying {}", self.desc()), limit: cutoff });
        }
        if self.is_dense() {
            return Ok(self.clone());
        }
        let mut table = vec![0; n * n];
        for a in 0..n as ElemId {
            for b in 0..n as ElemId {
                table[a as usize * n + b as usize] = self.mult(a, b);
            }
        }
        let g = GroupView::from_dense(table, self.generators().to_vec(), self.desc().to_string());
        Ok(match self.presented_by() {
            Some(p) => g.with_presentation(p.clone()),
            None => g,
        })
    }

    /// Spot-check associativity on `samples` deterministic pseudo-random triples.
    pub fn spot_check_associativity(&self, samples: usize) -> bool {
        let n = self.order() as u64;
        if n == 0 {
            return false;
        }
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % n) as ElemId
        };
        for _ in 0..samples {
            let (a, b, c) = (next(), next(), next());
            if self.mult(self.mult(a, b), c) != self.mult(a, self.mult(b, c)) {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Structured backends
// ---------------------------------------------------------------------------

/// Direct product with mixed-radix element ids (first factor most significant).
pub struct ProductGroup {
    factors: Vec<GroupView>,
    sizes: Vec<u32>,
    order: usize,
}

impl ProductGroup {
    pub fn new(factors: Vec<GroupView>) -> Self {
        let sizes: Vec<u32> = factors.iter().map(|f| f.order() as u32).collect();
        let order = sizes.iter().map(|&s| s as usize).product();
        ProductGroup { factors, sizes, order }
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn decode(&self, mut id: ElemId, out: &mut [u32]) {
        for i in (0..self.sizes.len()).rev() {
            out[i] = id % self.sizes[i];
            id /= self.sizes[i];
        }
        debug_assert_eq!(id, 0);
    }

    pub fn encode(&self, comps: &[u32]) -> ElemId {
        let mut id = 0u32;
        for (i, &c) in comps.iter().enumerate() {
            id = id * self.sizes[i] + c;
        }
        id
    }
}

impl StructuredOps for ProductGroup {
    fn order(&self) -> usize {
        self.order
    }

    fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        let k = self.sizes.len();
        let mut xa = [0u32; 8];
        let mut xb = [0u32; 8];
        self.decode(a, &mut xa[..k]);
        self.decode(b, &mut xb[..k]);
        let mut out = 0u32;
        for i in 0..k {
            out = out * self.sizes[i] + self.factors[i].mult(xa[i], xb[i]);
        }
        out
    }

    fn inv_hint(&self, a: ElemId) -> Option<ElemId> {
        let k = self.sizes.len();
        let mut xa = [0u32; 8];
        self.decode(a, &mut xa[..k]);
        let mut out = 0u32;
        for i in 0..k {
            out = out * self.sizes[i] + self.factors[i].inv(xa[i]);
        }
        Some(out)
    }

    fn kind(&self) -> &'static str {
        "product"
    }
}

/// Mixed-radix element ids with an arbitrary multiplication law on the
/// decoded tuples.  Used for the functor groups (extensions on normal-form
/// tuples, where the element *set* really is the full product).
pub struct FormulaGroup {
    sizes: Vec<u32>,
    order: usize,
    law: Box<dyn Fn(&[u32], &[u32], &mut [u32]) + Send + Sync>,
}

impl FormulaGroup {
    pub fn new(sizes: Vec<u32>, law: Box<dyn Fn(&[u32], &[u32], &mut [u32]) + Send + Sync>) -> Self {
        let order = sizes.iter().map(|&s| s as usize).product();
        assert!(sizes.len() <= 8);
        FormulaGroup { sizes, order, law }
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn decode(&self, mut id: ElemId, out: &mut [u32]) {
        for i in (0..self.sizes.len()).rev() {
            out[i] = id % self.sizes[i];
            id /= self.sizes[i];
        }
    }

    pub fn encode(&self, comps: &[u32]) -> ElemId {
        let mut id = 0u32;
        for (i, &c) in comps.iter().enumerate() {
            debug_assert!(c < self.sizes[i]);
            id = id * self.sizes[i] + c;
        }
        id
    }
}

impl StructuredOps for FormulaGroup {
    fn order(&self) -> usize {
        self.order
    }

    fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        let k = self.sizes.len();
        let mut xa = [0u32; 8];
        let mut xb = [0u32; 8];
        let mut xo = [0u32; 8];
        self.decode(a, &mut xa[..k]);
        self.decode(b, &mut xb[..k]);
        (self.law)(&xa[..k], &xb[..k], &mut xo[..k]);
        self.encode(&xo[..k])
    }

    fn kind(&self) -> &'static str {
        "formula"
    }
}

/// Explicitly listed tuples under a componentwise law (e.g. a subgroup of a
/// direct product that is not itself a full product).
pub struct ListedTupleGroup {
    comps: Vec<GroupView>,
    elems: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, u32>,
}

impl ListedTupleGroup {
    /// `elems` must be closed under the componentwise product and contain
    /// the identity tuple; it is sorted so the identity gets id 0.
    pub fn new(comps: Vec<GroupView>, mut elems: Vec<Vec<u32>>) -> Self {
        elems.sort();
        elems.dedup();
        assert!(elems[0].iter().all(|&c| c == 0), "identity tuple missing");
        let index: HashMap<Vec<u32>, u32> =
            elems.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
        ListedTupleGroup { comps, elems, index }
    }

    pub fn tuple(&self, id: ElemId) -> &[u32] {
        &self.elems[id as usize]
    }

    pub fn id_of(&self, tuple: &[u32]) -> Option<ElemId> {
        self.index.get(tuple).copied()
    }
}

impl StructuredOps for ListedTupleGroup {
    fn order(&self) -> usize {
        self.elems.len()
    }

    fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        let xa = &self.elems[a as usize];
        let xb = &self.elems[b as usize];
        let prod: Vec<u32> =
            (0..xa.len()).map(|i| self.comps[i].mult(xa[i], xb[i])).collect();
        *self.index.get(&prod).expect("listed tuple group not closed")
    }

    fn inv_hint(&self, a: ElemId) -> Option<ElemId> {
        let xa = &self.elems[a as usize];
        let inv: Vec<u32> = (0..xa.len()).map(|i| self.comps[i].inv(xa[i])).collect();
        self.index.get(&inv).copied()
    }

    fn kind(&self) -> &'static str {
        "listed"
    }
}

/// Quotient by a normal subgroup, with coset representatives as elements.
/// Keeps an O(|parent|) map instead of a dense table, so large structured
/// parents stay usable.
pub struct QuotientOps {
    parent: GroupView,
    reps: Vec<ElemId>,
    rep_index: Vec<u32>, // parent id -> quotient id
}

impl QuotientOps {
    pub fn rep(&self, q: ElemId) -> ElemId {
        self.reps[q as usize]
    }

    pub fn class_of(&self, parent_elem: ElemId) -> ElemId {
        self.rep_index[parent_elem as usize]
    }
}

impl StructuredOps for QuotientOps {
    fn order(&self) -> usize {
        self.reps.len()
    }

    fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        self.rep_index[self.parent.mult(self.reps[a as usize], self.reps[b as usize]) as usize]
    }

    fn kind(&self) -> &'static str {
        "quotient"
    }
}

/// A subgroup materialized as a group in its own right.
pub struct SubgroupOps {
    parent: GroupView,
    members: Vec<ElemId>,
    index: HashMap<ElemId, u32>,
}

impl SubgroupOps {
    pub fn to_parent(&self, id: ElemId) -> ElemId {
        self.members[id as usize]
    }

    pub fn from_parent(&self, parent_elem: ElemId) -> Option<ElemId> {
        self.index.get(&parent_elem).copied()
    }
}

impl StructuredOps for SubgroupOps {
    fn order(&self) -> usize {
        self.members.len()
    }

    fn mult(&self, a: ElemId, b: ElemId) -> ElemId {
        let p = self.parent.mult(self.members[a as usize], self.members[b as usize]);
        *self.index.get(&p).expect("subgroup not closed")
    }

    fn kind(&self) -> &'static str {
        "subgroup"
    }
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

/// A subgroup of a parent [`GroupView`]: sorted member ids plus a
/// generating set.
#[derive(Clone)]
pub struct Subgroup {
    parent: GroupView,
    members: Vec<ElemId>,
    generators: Vec<ElemId>,
}

impl std::fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subgroup(order {} of {:?})", self.members.len(), self.parent)
    }
}

impl Subgroup {
    pub fn parent(&self) -> &GroupView {
        &self.parent
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[ElemId] {
        &self.members
    }

    pub fn generators(&self) -> &[ElemId] {
        &self.generators
    }

    pub fn contains(&self, x: ElemId) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn is_normal(&self) -> bool {
        self.members.iter().all(|&m| {
            self.parent.generators().iter().all(|&g| self.contains(self.parent.conj(m, g)))
        })
    }

    pub fn is_central(&self) -> bool {
        self.members.iter().all(|&m| {
            self.parent.generators().iter().all(|&g| {
                self.parent.mult(m, g) == self.parent.mult(g, m)
            })
        })
    }

    /// Materialize as a standalone group; returns the view plus id maps.
    pub fn materialize(&self) -> MaterializedSubgroup {
        let index: HashMap<ElemId, u32> =
            self.members.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        let gens: Vec<ElemId> = self.generators.iter().map(|g| index[g]).collect();
        let ops = Arc::new(SubgroupOps {
            parent: self.parent.clone(),
            members: self.members.clone(),
            index,
        });
        let view = GroupView::from_structured(
            ops.clone(),
            gens,
            format!("subgroup[{}] of {}", self.members.len(), self.parent.desc()),
        );
        MaterializedSubgroup { view, ops }
    }

    /// Abelian invariants of this subgroup (must be abelian).
    pub fn abelian_invariants(&self) -> AbelianInvariants {
        let m = self.materialize();
        abelian_invariants_of_abelian(&m.view)
    }
}

pub struct MaterializedSubgroup {
    pub view: GroupView,
    pub ops: Arc<SubgroupOps>,
}

/// Smallest subgroup containing `seeds`; deterministic member ordering.
pub fn close_generators(parent: &GroupView, seeds: &[ElemId], budget: usize) -> Result<Subgroup> {
    for &s in seeds {
        assert!((s as usize) < parent.order(), "seed out of range");
    }
    let members = close_ids(parent, seeds, budget)?;
    // Trim the generating set greedily: drop seeds already generated.
    let mut gens: Vec<ElemId> = Vec::new();
    for &s in seeds {
        if s != 0 && !gens.contains(&s) {
            gens.push(s);
        }
    }
    Ok(Subgroup { parent: parent.clone(), members, generators: gens })
}

/// BFS closure of `seeds` under multiplication; returns sorted ids.
fn close_ids(parent: &GroupView, seeds: &[ElemId], budget: usize) -> Result<Vec<ElemId>> {
    let mut seen: HashMap<ElemId, ()> = HashMap::new();
    seen.insert(0, ());
    let mut frontier = vec![0];
    let gens: Vec<ElemId> = seeds.iter().copied().filter(|&s| s != 0).collect();
    while let Some(x) = frontier.pop() {
        for &g in &gens {
            let y = parent.mult(x, g);
            if seen.len() > budget {
                return Err(Error::BudgetExceeded { what: "subgroup closure".into(), limit: budget });
            }
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                e.insert(());
                frontier.push(y);
            }
        }
    }
    let mut members: Vec<ElemId> = seen.into_keys().collect();
    members.sort_unstable();
    Ok(members)
}

/// Normal closure of the commutators of all generator pairs.
pub fn derived_subgroup(g: &GroupView) -> Subgroup {
    let mut gens: Vec<ElemId> = Vec::new();
    for &x in g.generators() {
        for &y in g.generators() {
            let c = g.comm(x, y);
            if c != 0 && !gens.contains(&c) {
                gens.push(c);
            }
        }
    }
    normal_closure(g, &gens)
}

/// Normal closure of a seed set: close under multiplication, then keep
/// adjoining generator-conjugates of members that fall outside, until stable.
pub fn normal_closure(g: &GroupView, seeds: &[ElemId]) -> Subgroup {
    let mut gens: Vec<ElemId> = seeds.iter().copied().filter(|&s| s != 0).collect();
    gens.dedup();
    loop {
        let members = close_ids(g, &gens, CLOSURE_BUDGET).expect("closure budget");
        let mut grew = false;
        let set: std::collections::HashSet<ElemId> = members.iter().copied().collect();
        'outer: for &s in &gens.clone() {
            for &x in g.generators() {
                let c = g.conj(s, x);
                if !set.contains(&c) {
                    gens.push(c);
                    grew = true;
                    break 'outer;
                }
            }
        }
        if !grew {
            // Also check all members once (generators of the subgroup may not
            // exhaust conjugation obstructions for their products).
            let mut extra = None;
            'scan: for &m in &members {
                for &x in g.generators() {
                    let c = g.conj(m, x);
                    if !set.contains(&c) {
                        extra = Some(c);
                        break 'scan;
                    }
                }
            }
            match extra {
                Some(c) => gens.push(c),
                None => {
                    return Subgroup { parent: g.clone(), members, generators: gens };
                }
            }
        }
    }
}

/// Center: elements commuting with every generator (hence with everything).
pub fn center(g: &GroupView) -> Subgroup {
    let gens = g.generators().to_vec();
    let members: Vec<ElemId> = g
        .elements()
        .filter(|&z| gens.iter().all(|&x| g.mult(z, x) == g.mult(x, z)))
        .collect();
    subgroup_from_members(g, members)
}

/// Second center: preimage of Z(G/Z); z in Z2 iff [z,g] central for all gens.
pub fn second_center(g: &GroupView) -> Subgroup {
    let z = center(g);
    let members: Vec<ElemId> = g
        .elements()
        .filter(|&x| g.generators().iter().all(|&gen| z.contains(g.comm(x, gen))))
        .collect();
    subgroup_from_members(g, members)
}

/// Wrap an already-closed, sorted member set as a Subgroup, computing a
/// small generating set.
pub fn subgroup_from_members(g: &GroupView, mut members: Vec<ElemId>) -> Subgroup {
    members.sort_unstable();
    let mut gens: Vec<ElemId> = Vec::new();
    let mut span: std::collections::HashSet<ElemId> = [0].into_iter().collect();
    for &m in &members {
        if !span.contains(&m) {
            gens.push(m);
            // grow span
            let mut frontier: Vec<ElemId> = span.iter().copied().collect();
            while let Some(x) = frontier.pop() {
                for &s in &gens {
                    let y = g.mult(x, s);
                    if span.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
    }
    Subgroup { parent: g.clone(), members, generators: gens }
}

pub fn trivial_subgroup(g: &GroupView) -> Subgroup {
    Subgroup { parent: g.clone(), members: vec![0], generators: vec![] }
}

pub fn full_subgroup(g: &GroupView) -> Subgroup {
    Subgroup {
        parent: g.clone(),
        members: g.elements().collect(),
        generators: g.generators().to_vec(),
    }
}

// ---------------------------------------------------------------------------
// Quotients
// ---------------------------------------------------------------------------

/// Quotient by a normal subgroup.  Returns the quotient (dense when it fits
/// under `dense_cutoff`, coset-representative backed otherwise) and the
/// projection morphism.
pub fn quotient(g: &GroupView, n: &Subgroup, dense_cutoff: usize) -> Result<(GroupView, Morphism)> {
    if !n.is_normal() {
        return Err(Error::NotNormal);
    }
    let order = g.order();
    let mut rep_index = vec![u32::MAX; order];
    let mut reps: Vec<ElemId> = Vec::new();
    for x in 0..order as ElemId {
        if rep_index[x as usize] != u32::MAX {
            continue;
        }
        let q = reps.len() as u32;
        reps.push(x);
        for &m in n.members() {
            let y = g.mult(x, m);
            debug_assert!(rep_index[y as usize] == u32::MAX || rep_index[y as usize] == q);
            rep_index[y as usize] = q;
        }
    }
    let qorder = reps.len();
    let ops = Arc::new(QuotientOps { parent: g.clone(), reps, rep_index });
    let gens: Vec<ElemId> = {
        let mut gset: Vec<ElemId> = g.generators().iter().map(|&x| ops.class_of(x)).collect();
        gset.retain(|&q| q != 0);
        gset.dedup();
        gset
    };
    let full_map: Vec<ElemId> = (0..order).map(|x| ops.class_of(x as ElemId)).collect();
    let view = GroupView::from_structured(
        ops,
        gens,
        format!("{}/[{}]", g.desc(), n.order()),
    );
    let view = if qorder <= dense_cutoff { view.materialize_dense(dense_cutoff)? } else { view };
    let proj = Morphism::from_full_map_unchecked(g.clone(), view.clone(), full_map);
    debug_assert!(proj.verify());
    Ok((view, proj))
}

// ---------------------------------------------------------------------------
// Morphisms
// ---------------------------------------------------------------------------

/// A verified (or verifiable) homomorphism between groups, stored as a
/// total map on element ids.
#[derive(Clone)]
pub struct Morphism {
    source: GroupView,
    target: GroupView,
    full_map: Arc<Vec<ElemId>>,
}

impl std::fmt::Debug for Morphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Morphism({:?} -> {:?})", self.source, self.target)
    }
}

impl Morphism {
    /// Build from generator images by breadth-first extension, then verify
    /// `f(x*g) = f(x)*f(g)` for every element x and generator g (which is
    /// sufficient by induction on word length).
    pub fn from_gen_images(
        source: &GroupView,
        gens: &[ElemId],
        images: &[ElemId],
        target: &GroupView,
    ) -> Result<Morphism> {
        assert_eq!(gens.len(), images.len());
        let n = source.order();
        let mut map = vec![u32::MAX; n];
        map[0] = 0;
        let mut queue = std::collections::VecDeque::from([0u32]);
        while let Some(x) = queue.pop_front() {
            for (i, &g) in gens.iter().enumerate() {
                let y = source.mult(x, g);
                if map[y as usize] == u32::MAX {
                    map[y as usize] = target.mult(map[x as usize], images[i]);
                    queue.push_back(y);
                }
            }
        }
        if map.iter().any(|&v| v == u32::MAX) {
            return Err(Error::NotAMorphism("given generators do not generate the source".into()));
        }
        let m = Morphism { source: source.clone(), target: target.clone(), full_map: Arc::new(map) };
        if !m.verify_against(gens, images) {
            return Err(Error::NotAMorphism("relation check failed".into()));
        }
        Ok(m)
    }

    /// Wrap a closed-formula map without verification (caller verifies).
    pub fn from_full_map_unchecked(source: GroupView, target: GroupView, map: Vec<ElemId>) -> Morphism {
        Morphism { source, target, full_map: Arc::new(map) }
    }

    /// Wrap and verify a closed-formula map.
    pub fn from_full_map(source: GroupView, target: GroupView, map: Vec<ElemId>) -> Result<Morphism> {
        let m = Morphism::from_full_map_unchecked(source, target, map);
        if !m.verify() {
            return Err(Error::NotAMorphism("full-map verification failed".into()));
        }
        Ok(m)
    }

    pub fn source(&self) -> &GroupView {
        &self.source
    }

    pub fn target(&self) -> &GroupView {
        &self.target
    }

    #[inline]
    pub fn apply(&self, x: ElemId) -> ElemId {
        self.full_map[x as usize]
    }

    pub fn gen_images(&self) -> Vec<ElemId> {
        self.source.generators().iter().map(|&g| self.apply(g)).collect()
    }

    /// Full verification of the homomorphism property against the source's
    /// generator set.
    pub fn verify(&self) -> bool {
        let gens = self.source.generators().to_vec();
        let images: Vec<ElemId> = gens.iter().map(|&g| self.apply(g)).collect();
        self.full_map[0] == 0 && self.verify_against(&gens, &images)
    }

    fn verify_against(&self, gens: &[ElemId], images: &[ElemId]) -> bool {
        for x in self.source.elements() {
            let fx = self.full_map[x as usize];
            for (i, &g) in gens.iter().enumerate() {
                if self.full_map[self.source.mult(x, g) as usize] != self.target.mult(fx, images[i]) {
                    return false;
                }
            }
        }
        true
    }

    /// First `(x, gen)` pair violating the homomorphism property, if any.
    pub fn first_defect(&self) -> Option<(ElemId, ElemId)> {
        let gens = self.source.generators().to_vec();
        for x in self.source.elements() {
            for &g in &gens {
                if self.full_map[self.source.mult(x, g) as usize]
                    != self.target.mult(self.full_map[x as usize], self.apply(g))
                {
                    return Some((x, g));
                }
            }
        }
        None
    }

    pub fn kernel(&self) -> Subgroup {
        let members: Vec<ElemId> =
            self.source.elements().filter(|&x| self.full_map[x as usize] == 0).collect();
        subgroup_from_members(&self.source, members)
    }

    pub fn image(&self) -> Subgroup {
        let mut members: Vec<ElemId> = self.full_map.iter().copied().collect();
        members.sort_unstable();
        members.dedup();
        subgroup_from_members(&self.target, members)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.order()];
        for &v in self.full_map.iter() {
            if seen[v as usize] {
                return false;
            }
            seen[v as usize] = true;
        }
        true
    }

    pub fn is_bijective(&self) -> bool {
        self.source.order() == self.target.order() && self.is_injective()
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.order()];
        let mut count = 0;
        for &v in self.full_map.iter() {
            if !seen[v as usize] {
                seen[v as usize] = true;
                count += 1;
            }
        }
        count == self.target.order()
    }

    pub fn identity(g: &GroupView) -> Morphism {
        Morphism {
            source: g.clone(),
            target: g.clone(),
            full_map: Arc::new(g.elements().collect()),
        }
    }

    pub fn compose(&self, then: &Morphism) -> Morphism {
        assert_eq!(self.target.order(), then.source.order());
        let map: Vec<ElemId> = self.full_map.iter().map(|&v| then.apply(v)).collect();
        Morphism { source: self.source.clone(), target: then.target.clone(), full_map: Arc::new(map) }
    }

    /// Inverse of a bijective morphism.
    pub fn inverse(&self) -> Morphism {
        assert!(self.is_bijective());
        let mut map = vec![0u32; self.target.order()];
        for x in self.source.elements() {
            map[self.apply(x) as usize] = x;
        }
        Morphism { source: self.target.clone(), target: self.source.clone(), full_map: Arc::new(map) }
    }
}

// ---------------------------------------------------------------------------
// Abelian invariants and statistics
// ---------------------------------------------------------------------------

/// Invariant factors d1 | d2 | ... of a finite abelian group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbelianInvariants {
    pub factors: Vec<u64>,
}

impl AbelianInvariants {
    pub fn trivial() -> Self {
        AbelianInvariants { factors: vec![] }
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Normalize an arbitrary list of cyclic orders into invariant factors.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        // primary decomposition, then zip largest-with-largest
        let mut primary: HashMap<u64, Vec<u32>> = HashMap::new();
        for &d in orders {
            let mut d = d;
            let mut p = 2;
            while p * p <= d {
                if d % p == 0 {
                    let mut e = 0;
                    while d % p == 0 {
                        d /= p;
                        e += 1;
                    }
                    primary.entry(p).or_default().push(e);
                }
                p += 1;
            }
            if d > 1 {
                primary.entry(d).or_default().push(1);
            }
        }
        let mut rank = 0;
        for v in primary.values_mut() {
            v.sort_unstable_by(|a, b| b.cmp(a));
            rank = rank.max(v.len());
        }
        let mut factors = vec![1u64; rank];
        for (&p, exps) in &primary {
            for (i, &e) in exps.iter().enumerate() {
                factors[i] *= p.pow(e);
            }
        }
        factors.retain(|&f| f > 1);
        factors.reverse(); // ascending, d1 | d2 | ...
        AbelianInvariants { factors }
    }
}

impl std::fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "[{}]", self.factors.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
        }
    }
}

/// Invariant factors of an abelian group, by order counting: for each prime
/// p the counts #{x : x^(p^k)=1} determine the partition of exponents.
pub fn abelian_invariants_of_abelian(g: &GroupView) -> AbelianInvariants {
    let n = g.order() as u64;
    if n == 1 {
        return AbelianInvariants::trivial();
    }
    let mut cyclic: Vec<u64> = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    let mut primes = Vec::new();
    while p * p <= m {
        if m % p == 0 {
            primes.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for &p in &primes {
        // counts[k] = #{x : x^(p^k) = 1}
        let mut counts = vec![1u64];
        loop {
            let k = counts.len() as u32;
            let pk = p.pow(k);
            let c = g.elements().filter(|&x| g.pow(x, pk as i64) == 0).count() as u64;
            counts.push(c);
            if c == *counts[counts.len() - 2..].first().unwrap() {
                counts.pop();
                break;
            }
        }
        // log_p of counts gives partial sums sum_i min(lambda_i, k)
        let logs: Vec<u32> = counts
            .iter()
            .map(|&c| {
                let mut e = 0;
                let mut c = c;
                while c > 1 {
                    assert_eq!(c % p, 0, "non-p-power order count in abelian invariants");
                    c /= p;
                    e += 1;
                }
                e
            })
            .collect();
        // m_k = #{i : lambda_i >= k} = logs[k] - logs[k-1]
        let mut lambda: Vec<u32> = Vec::new();
        for k in 1..logs.len() {
            let mk = logs[k] - logs[k - 1];
            for i in 0..mk {
                if lambda.len() <= i as usize {
                    lambda.push(0);
                }
                lambda[i as usize] = k as u32;
            }
        }
        for &e in &lambda {
            cyclic.push(p.pow(e));
        }
    }
    AbelianInvariants::from_cyclic_orders(&cyclic)
}

/// Invariant factors of G/G' for an arbitrary group.
pub fn abelian_invariants(g: &GroupView) -> AbelianInvariants {
    let derived = derived_subgroup(g);
    if derived.is_trivial() {
        return abelian_invariants_of_abelian(g);
    }
    let (q, _) = quotient(g, &derived, usize::MAX).expect("derived subgroup is normal");
    abelian_invariants_of_abelian(&q)
}

/// Exact order statistics: exponent, element-order histogram, conjugacy
/// class size multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderStats {
    pub exponent: u64,
    pub histogram: std::collections::BTreeMap<u64, u64>,
    pub class_sizes: Vec<u64>,
}

pub fn order_stats(g: &GroupView) -> OrderStats {
    let mut histogram = std::collections::BTreeMap::new();
    let mut exponent = 1u64;
    for x in g.elements() {
        let o = g.element_order(x);
        *histogram.entry(o).or_insert(0) += 1;
        exponent = lcm(exponent, o);
    }
    let class_sizes = conjugacy_class_sizes(g);
    OrderStats { exponent, histogram, class_sizes }
}

pub fn conjugacy_class_sizes(g: &GroupView) -> Vec<u64> {
    let n = g.order();
    let gens = g.generators().to_vec();
    let inv_gens: Vec<ElemId> = gens.iter().map(|&x| g.inv(x)).collect();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for x in 0..n as ElemId {
        if seen[x as usize] {
            continue;
        }
        seen[x as usize] = true;
        let mut stack = vec![x];
        let mut size = 1u64;
        while let Some(y) = stack.pop() {
            for (i, &gen) in gens.iter().enumerate() {
                let c = g.mult(g.mult(inv_gens[i], y), gen);
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    size += 1;
                    stack.push(c);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    sizes
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Direct product as a structured group (components stay lazy).
pub fn direct_product(g1: &GroupView, g2: &GroupView) -> GroupView {
    let ops = Arc::new(ProductGroup::new(vec![g1.clone(), g2.clone()]));
    let n2 = g2.order() as u32;
    let mut gens: Vec<ElemId> = Vec::new();
    for &a in g1.generators() {
        gens.push(a * n2);
    }
    for &b in g2.generators() {
        gens.push(b);
    }
    GroupView::from_structured(ops, gens, format!("({} x {})", g1.desc(), g2.desc()))
}

/// n-fold direct product (single mixed-radix backend).
pub fn direct_power(g: &GroupView, n: usize) -> GroupView {
    let ops = Arc::new(ProductGroup::new(vec![g.clone(); n]));
    let mut gens = Vec::new();
    let size = g.order() as u64;
    for i in 0..n {
        let shift = size.pow((n - 1 - i) as u32) as u32;
        for &a in g.generators() {
            gens.push(a * shift);
        }
    }
    GroupView::from_structured(ops, gens, format!("{}^{}", g.desc(), n))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense cyclic group for tests.
    pub fn cyclic_dense(n: u32) -> GroupView {
        let mut table = vec![0u32; (n * n) as usize];
        for a in 0..n {
            for b in 0..n {
                table[(a * n + b) as usize] = (a + b) % n;
            }
        }
        let gens = if n > 1 { vec![1] } else { vec![] };
        GroupView::from_dense(table, gens, format!("C{n}"))
    }

    #[test]
    fn cyclic_basics() {
        let c6 = cyclic_dense(6);
        assert_eq!(c6.order(), 6);
        assert_eq!(c6.inv(2), 4);
        assert_eq!(c6.pow(1, 9), 3);
        assert_eq!(c6.element_order(2), 3);
        assert!(c6.is_abelian());
    }

    #[test]
    fn closure_and_lagrange() {
        let c12 = cyclic_dense(12);
        let h = close_generators(&c12, &[4], usize::MAX).unwrap();
        assert_eq!(h.order(), 3);
        assert_eq!(12 % h.order(), 0);
        let t = close_generators(&c12, &[], usize::MAX).unwrap();
        assert_eq!(t.order(), 1);
    }

    #[test]
    fn quotient_kernel_roundtrip() {
        let c12 = cyclic_dense(12);
        let n = close_generators(&c12, &[4], usize::MAX).unwrap();
        let (q, proj) = quotient(&c12, &n, DENSE_CUTOFF).unwrap();
        assert_eq!(q.order(), 4);
        assert_eq!(proj.kernel().members(), n.members());
    }

    #[test]
    fn abelian_invariant_counting() {
        let c4xc4 = direct_product(&cyclic_dense(4), &cyclic_dense(4));
        let inv = abelian_invariants(&c4xc4);
        assert_eq!(inv.factors, vec![4, 4]);
        let c2xc3 = direct_product(&cyclic_dense(2), &cyclic_dense(3));
        assert_eq!(abelian_invariants(&c2xc3).factors, vec![6]);
    }

    #[test]
    fn order_stats_c2xc2() {
        let v = direct_product(&cyclic_dense(2), &cyclic_dense(2));
        let s = order_stats(&v);
        assert_eq!(s.exponent, 2);
        assert_eq!(s.histogram.get(&1), Some(&1));
        assert_eq!(s.histogram.get(&2), Some(&3));
        assert_eq!(s.class_sizes, vec![1, 1, 1, 1]);
    }

    #[test]
    fn morphism_square_on_c4() {
        let c4 = cyclic_dense(4);
        let f = Morphism::from_gen_images(&c4, &[1], &[2], &c4).unwrap();
        assert_eq!(f.kernel().order(), 2);
        assert_eq!(f.image().order(), 2);
        assert!(!f.is_injective());
    }

    #[test]
    fn invalid_morphism_rejected() {
        let c4 = cyclic_dense(4);
        let c3 = cyclic_dense(3);
        assert!(Morphism::from_gen_images(&c4, &[1], &[1], &c3).is_err());
    }

    #[test]
    fn structured_dense_agree() {
        let p = direct_product(&cyclic_dense(6), &cyclic_dense(4));
        let d = p.materialize_dense(DENSE_CUTOFF).unwrap();
        for a in p.elements() {
            for b in p.elements() {
                assert_eq!(p.mult(a, b), d.mult(a, b));
            }
        }
        assert!(p.spot_check_associativity(1000));
    }
}
