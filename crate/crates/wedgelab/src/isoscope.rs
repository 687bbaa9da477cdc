//! Isomorphism testing at desk scale: cheap invariant fingerprints, the
//! derived-conjugation matrix invariant, explicit-map verification, and a
//! bounded backtracking isomorphism search.

use std::collections::BTreeMap;

use crate::automorphisms::{self, AutSearchBudget, SearchMode};
use crate::error::{Error, Result};
use crate::group::{
    abelian_invariants, center, derived_subgroup, second_center, ElemId, GroupView, Morphism,
    OrderStats,
};
use crate::wedge::{abelian_basis, abelian_coords};

/// A bundle of isomorphism invariants; equality is necessary (not
/// sufficient) for isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub order: u64,
    /// invariant factors of G/G′
    pub abelianization: Vec<u64>,
    pub derived_order: u64,
    pub center_order: u64,
    /// invariant factors of Z(G)
    pub center_invariants: Vec<u64>,
    pub exponent: u64,
    pub order_histogram: BTreeMap<u64, u64>,
    pub class_sizes: Vec<u64>,
    /// None for non-solvable groups
    pub derived_length: Option<u32>,
    pub second_center_order: u64,
}

/// Cap on the order of structured groups we fingerprint.
pub const FINGERPRINT_CAP: usize = 4_000_000;

pub fn fingerprint(g: &GroupView) -> Result<Fingerprint> {
    if g.order() > FINGERPRINT_CAP {
        return Err(Error::BudgetExceeded {
            what: format!("fingerprint of {}", g.desc()),
            limit: FINGERPRINT_CAP,
        });
    }
    let stats: OrderStats = crate::group::order_stats(g);
    let z = center(g);
    let z2 = second_center(g);
    let der = derived_subgroup(g);
    let derived_length = {
        let mut cur = g.clone();
        let mut len = 0u32;
        loop {
            let d = derived_subgroup(&cur);
            if d.order() == 1 {
                break Some(len + if cur.order() > 1 { 1 } else { 0 });
            }
            if d.order() == cur.order() {
                break None; // perfect subgroup reached: not solvable
            }
            len += 1;
            cur = d.materialize().view;
        }
    };
    Ok(Fingerprint {
        order: g.order() as u64,
        abelianization: abelian_invariants(g).factors,
        derived_order: der.order() as u64,
        center_order: z.order() as u64,
        center_invariants: z.abelian_invariants().factors,
        exponent: stats.exponent,
        order_histogram: stats.histogram,
        class_sizes: stats.class_sizes,
        derived_length,
        second_center_order: z2.order() as u64,
    })
}

/// Return the name and the two values of the first differing field, if any.
pub fn fingerprint_diff(a: &Fingerprint, b: &Fingerprint) -> Option<String> {
    macro_rules! check {
        ($field:ident) => {
            if a.$field != b.$field {
                return Some(format!(
                    "{}: {:?} vs {:?}",
                    stringify!($field),
                    a.$field,
                    b.$field
                ));
            }
        };
    }
    check!(order);
    check!(abelianization);
    check!(derived_order);
    check!(center_order);
    check!(center_invariants);
    check!(exponent);
    check!(order_histogram);
    check!(class_sizes);
    check!(derived_length);
    check!(second_center_order);
    None
}

/// GL-conjugacy-stable data of the conjugation action of G on an abelian G′.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedActionInvariant {
    /// exponent of G′ (the modulus the determinants live in)
    pub modulus: u64,
    /// the subgroup of (Z/modulus)^* generated by all action determinants
    pub determinant_subgroup: Vec<u64>,
    /// order of the induced subgroup of Aut(G′)
    pub action_group_order: u64,
    /// per-generator determinants (presentation-dependent; informational)
    pub generator_determinants: Vec<u64>,
}

impl DerivedActionInvariant {
    pub fn all_in_sl(&self) -> bool {
        self.determinant_subgroup == [1]
    }
    /// Equality of the canonical (generator-independent) parts.
    pub fn canonical_eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && self.determinant_subgroup == other.determinant_subgroup
            && self.action_group_order == other.action_group_order
    }
}

fn det_mod(mat: &[Vec<i128>], m: u64) -> u64 {
    // Bareiss fraction-free elimination over the integers, reduced at the end
    let n = mat.len();
    let mut a: Vec<Vec<i128>> = mat.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n.saturating_sub(1) {
        if a[k][k] == 0 {
            let swap = (k + 1..n).find(|&i| a[i][k] != 0);
            match swap {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    let det = if n == 0 { 1 } else { sign * a[n - 1][n - 1] };
    let mm = m as i128;
    (((det % mm) + mm) % mm) as u64
}

/// Conjugation matrices of the generators of G on a basis of an abelian G′;
/// stores determinant data mod the exponent of G′.
pub fn derived_action(g: &GroupView) -> Result<DerivedActionInvariant> {
    let der = derived_subgroup(g).materialize();
    let dv = &der.view;
    if !dv.is_abelian() {
        return Err(Error::NotApplicable("derived subgroup is not abelian".into()));
    }
    if dv.order() == 1 {
        return Ok(DerivedActionInvariant {
            modulus: 1,
            determinant_subgroup: vec![0],
            action_group_order: 1,
            generator_determinants: g.generators().iter().map(|_| 0).collect(),
        });
    }
    let basis = abelian_basis(dv);
    let coords = abelian_coords(dv, &basis);
    let modulus = basis[0].1; // largest order = exponent of G'
    let k = basis.len();
    let mut generator_determinants = Vec::new();
    let mut det_gens: Vec<u64> = Vec::new();
    for &t in g.generators() {
        // row i = coordinates of (b_i)^t
        let mut mat = vec![vec![0i128; k]; k];
        for (i, &(b, _)) in basis.iter().enumerate() {
            let conj = der
                .ops
                .from_parent(g.conj(der.ops.to_parent(b), t))
                .ok_or_else(|| Error::HypothesisFailed("G' not normal?".into()))?;
            for (j, &c) in coords[conj as usize].iter().enumerate() {
                mat[i][j] = c as i128;
            }
        }
        let d = det_mod(&mat, modulus);
        generator_determinants.push(d);
        det_gens.push(d);
    }
    // close the determinant set into a subgroup of units
    let mut dets: Vec<u64> = vec![1 % modulus.max(1)];
    let mut frontier = dets.clone();
    while let Some(x) = frontier.pop() {
        for &d in &det_gens {
            let y = x * d % modulus;
            if !dets.contains(&y) {
                dets.push(y);
                frontier.push(y);
            }
        }
    }
    dets.sort_unstable();
    // order of the induced subgroup of Aut(G'): close the conjugation
    // permutations of G' under composition
    let n = dv.order();
    let perm_gens: Vec<Vec<ElemId>> = g
        .generators()
        .iter()
        .map(|&t| {
            (0..n as ElemId)
                .map(|x| der.ops.from_parent(g.conj(der.ops.to_parent(x), t)).unwrap())
                .collect()
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    let identity: Vec<ElemId> = (0..n as ElemId).collect();
    seen.insert(identity.clone());
    let mut stack = vec![identity];
    while let Some(p) = stack.pop() {
        for gp in &perm_gens {
            let q: Vec<ElemId> = p.iter().map(|&x| gp[x as usize]).collect();
            if seen.insert(q.clone()) {
                stack.push(q);
            }
        }
    }
    Ok(DerivedActionInvariant {
        modulus,
        determinant_subgroup: dets,
        action_group_order: seen.len() as u64,
        generator_determinants,
    })
}

/// Verdict of an isomorphism test.
pub enum IsoVerdict {
    Yes(Morphism),
    /// name + values of the distinguishing invariant, or a completed search
    No(String),
    Unknown,
}

impl IsoVerdict {
    pub fn verdict(&self) -> &'static str {
        match self {
            IsoVerdict::Yes(_) => "yes",
            IsoVerdict::No(_) => "no",
            IsoVerdict::Unknown => "unknown",
        }
    }
}

/// Default cap on the order for the backtracking isomorphism search.
pub const ISO_SEARCH_CAP: usize = 2000;

pub fn are_isomorphic(g1: &GroupView, g2: &GroupView, budget: &AutSearchBudget) -> Result<IsoVerdict> {
    are_isomorphic_capped(g1, g2, budget, ISO_SEARCH_CAP)
}

/// Cheap invariants first; derived-action invariant next; then a bounded
/// backtracking search for an explicit isomorphism.
pub fn are_isomorphic_capped(
    g1: &GroupView,
    g2: &GroupView,
    budget: &AutSearchBudget,
    search_cap: usize,
) -> Result<IsoVerdict> {
    let f1 = fingerprint(g1)?;
    let f2 = fingerprint(g2)?;
    if let Some(diff) = fingerprint_diff(&f1, &f2) {
        return Ok(IsoVerdict::No(diff));
    }
    if let (Ok(a1), Ok(a2)) = (derived_action(g1), derived_action(g2)) {
        if !a1.canonical_eq(&a2) {
            return Ok(IsoVerdict::No(format!(
                "derived_action: dets {:?} order {} vs dets {:?} order {}",
                a1.determinant_subgroup,
                a1.action_group_order,
                a2.determinant_subgroup,
                a2.action_group_order
            )));
        }
    }
    if g1.order() > search_cap {
        return Ok(IsoVerdict::Unknown);
    }
    // backtracking: greedy generators of g1, signature-matched candidates in g2
    let gens = automorphisms::greedy_generators(g1, 6)?;
    let sig1 = automorphisms::element_signatures(g1);
    let sig2 = automorphisms::element_signatures(g2);
    let candidates: Vec<Vec<ElemId>> = gens
        .iter()
        .map(|&gi| g2.elements().filter(|&x| sig2[x as usize] == sig1[gi as usize]).collect())
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return Ok(IsoVerdict::No("element signature multisets differ".into()));
    }
    let mut found: Option<Morphism> = None;
    let budget = AutSearchBudget { mode: SearchMode::FindOne, ..budget.clone() };
    let complete = automorphisms::search(g1, g2, &gens, &candidates, &budget, &mut |m| {
        found = Some(m);
        false
    })?;
    match (found, complete) {
        (Some(m), _) => {
            // re-verify before reporting Yes
            if !m.verify() || !m.is_bijective() {
                return Err(Error::NotAMorphism("search returned an unverified map".into()));
            }
            Ok(IsoVerdict::Yes(m))
        }
        (None, true) => Ok(IsoVerdict::No("exhaustive image search".into())),
        (None, false) => Ok(IsoVerdict::Unknown),
    }
}

/// An explicit candidate isomorphism, either by generator images or as a
/// full element map.
pub enum IsoSpec {
    GenImages { gens: Vec<ElemId>, images: Vec<ElemId> },
    FullMap(Vec<ElemId>),
}

pub struct IsoCheckReport {
    pub ok: bool,
    /// first failing relator/pair, if any
    pub failure: Option<String>,
}

/// Verify a claimed isomorphism: morphism property, injectivity, equal
/// orders.  On failure the report carries the first defect found.
pub fn verify_explicit_iso(g1: &GroupView, g2: &GroupView, spec: &IsoSpec) -> IsoCheckReport {
    if g1.order() != g2.order() {
        return IsoCheckReport {
            ok: false,
            failure: Some(format!("orders differ: {} vs {}", g1.order(), g2.order())),
        };
    }
    let morphism = match spec {
        IsoSpec::GenImages { gens, images } => {
            match Morphism::from_gen_images(g1, gens, images, g2) {
                Ok(m) => m,
                Err(e) => return IsoCheckReport { ok: false, failure: Some(e.to_string()) },
            }
        }
        IsoSpec::FullMap(map) => {
            if map.len() != g1.order() {
                return IsoCheckReport { ok: false, failure: Some("map length mismatch".into()) };
            }
            let m = Morphism::from_full_map_unchecked(g1.clone(), g2.clone(), map.clone());
            if let Some((x, y)) = m.first_defect() {
                return IsoCheckReport {
                    ok: false,
                    failure: Some(format!(
                        "not multiplicative at ({x},{y}): f(xy)={} but f(x)f(y)={}",
                        m.apply(g1.mult(x, y)),
                        g2.mult(m.apply(x), m.apply(y))
                    )),
                };
            }
            m
        }
    };
    if !morphism.is_injective() {
        return IsoCheckReport { ok: false, failure: Some("map is not injective".into()) };
    }
    IsoCheckReport { ok: true, failure: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{construct, Family};

    fn make(s: &str) -> GroupView {
        construct(&Family::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn fingerprint_separates_q8_d8() {
        let a = fingerprint(&make("q8")).unwrap();
        let b = fingerprint(&make("d8")).unwrap();
        let diff = fingerprint_diff(&a, &b).unwrap();
        assert!(diff.contains("order_histogram"), "{diff}");
    }

    #[test]
    fn fingerprint_deterministic() {
        let g = make("sym4");
        assert_eq!(fingerprint(&g).unwrap(), fingerprint(&g).unwrap());
        let f = fingerprint(&g).unwrap();
        assert_eq!(f.derived_length, Some(3));
        assert_eq!(f.abelianization, vec![2]);
    }

    #[test]
    fn fingerprint_nonsolvable() {
        let f = fingerprint(&make("alt5")).unwrap();
        assert_eq!(f.derived_length, None);
        assert_eq!(f.class_sizes, vec![1, 12, 12, 15, 20]);
    }

    #[test]
    fn iso_self_and_search() {
        let g = make("sym3");
        let budget = AutSearchBudget::default();
        match are_isomorphic(&g, &g, &budget).unwrap() {
            IsoVerdict::Yes(m) => assert!(m.is_bijective()),
            _ => panic!("G is isomorphic to itself"),
        }
        // two different presentations of the same group
        let a = make("holder:3,2,2"); // Sym3 as a Hölder group
        match are_isomorphic(&g, &a, &budget).unwrap() {
            IsoVerdict::Yes(m) => assert!(m.verify()),
            _ => panic!("sym3 ≅ holder:3,2,2"),
        }
        match are_isomorphic(&make("q8"), &make("d8"), &budget).unwrap() {
            IsoVerdict::No(_) => {}
            _ => panic!("Q8 ≇ D8"),
        }
    }

    #[test]
    fn derived_action_abelian_is_trivial() {
        let g = make("abelian:4,4");
        let a = derived_action(&g).unwrap();
        assert_eq!(a.action_group_order, 1);
    }

    #[test]
    fn derived_action_holder() {
        // holder:5,4,2 = C4 acting on C5 by r=2; G' = C5, conjugation acts
        // with determinant r (1x1 matrices)
        let g = make("holder:5,4,2");
        let a = derived_action(&g).unwrap();
        assert_eq!(a.modulus, 5);
        // action group = <2 mod 5>, order 4; determinant subgroup all units
        assert_eq!(a.action_group_order, 4);
        assert_eq!(a.determinant_subgroup, vec![1, 2, 3, 4]);
    }

    #[test]
    fn explicit_iso_reports_defect() {
        let g = make("c4");
        // the squaring map is a morphism but not injective
        let sq: Vec<ElemId> = g.elements().map(|x| g.mult(x, x)).collect();
        let rep = verify_explicit_iso(&g, &g, &IsoSpec::FullMap(sq));
        assert!(!rep.ok);
        assert!(rep.failure.unwrap().contains("injective"));
        // a non-multiplicative map reports its first bad pair
        let mut bad: Vec<ElemId> = g.elements().collect();
        bad.swap(1, 2);
        let rep = verify_explicit_iso(&g, &g, &IsoSpec::FullMap(bad));
        assert!(!rep.ok);
        assert!(rep.failure.unwrap().contains("not multiplicative"));
        // identity passes
        let rep = verify_explicit_iso(&g, &g, &IsoSpec::FullMap(g.elements().collect()));
        assert!(rep.ok);
    }
}
