//! The exterior square G∧G packaged as a wedge group W together with the
//! pairing G×G→W, the G-action on W, and the commutator map κ: W→G.
//! ker κ is the Schur multiplier.
//!
//! Four construction strategies, cheapest-correct-first:
//! abelian closed form, derived subgroup of a covering group, direct-product
//! splitting, and the generic crossed-pairing coset enumeration.

use std::collections::HashMap;
use std::sync::Arc;

use crate::constructors::{schur_cover, CoverData, Family};
use crate::error::{Error, Result};
use crate::group::{
    self, close_generators, derived_subgroup, quotient, subgroup_from_members, AbelianInvariants,
    ElemId, GroupView, Morphism, Subgroup, DENSE_CUTOFF,
};
use crate::presentation::Presentation;
use crate::todd_coxeter::{realize, DEFAULT_MAX_COSETS};
use crate::words::Word;

/// Default |G| cap for the generic crossed-pairing strategy.
pub const GENERIC_CAP: usize = 16;

/// Decomposition of an abelian group as independent cyclic generators,
/// with discrete-log coordinates for every element.
pub struct AbelianModel {
    /// (element id, order) per basis generator; orders non-increasing
    pub basis: Vec<(ElemId, u64)>,
    /// coords[elem] = exponent tuple in the basis
    pub coords: Vec<Vec<u32>>,
    /// orders of the wedge components x_i∧x_j, pairs (i,j) with i<j in
    /// lexicographic order; component order = gcd(d_i, d_j)
    pub comp_orders: Vec<u64>,
}

impl AbelianModel {
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        assert!(i < j);
        let k = self.basis.len();
        // pairs (0,1)..(0,k-1),(1,2)..: offset of row i is i*k - i(i+1)/2
        i * k - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn encode_wedge(&self, comps: &[u64]) -> ElemId {
        let mut id = 0u64;
        for (t, &m) in self.comp_orders.iter().enumerate() {
            id = id * m + comps[t] % m;
        }
        id as ElemId
    }
}

/// Extra data kept when W was realized as the derived subgroup of a cover.
pub struct CoverLink {
    pub data: Arc<CoverData>,
    /// W id of a cover element lying in H′
    pub w_of_h: HashMap<ElemId, ElemId>,
    /// cover element id of each W element
    pub h_of_w: Vec<ElemId>,
}

pub struct WedgeStructure {
    pub group: GroupView,
    pub wedge: GroupView,
    /// pair[g*|G|+h] = g∧h
    pair: Vec<ElemId>,
    /// act[w*|G|+g] = w^g
    act: Vec<ElemId>,
    /// kappa[w] = κ(w) ∈ G
    kappa: Vec<ElemId>,
    pub strategy: &'static str,
    pub abelian_model: Option<AbelianModel>,
    pub cover_link: Option<CoverLink>,
}

impl WedgeStructure {
    #[inline]
    pub fn pair(&self, g: ElemId, h: ElemId) -> ElemId {
        self.pair[g as usize * self.group.order() + h as usize]
    }

    #[inline]
    pub fn act(&self, w: ElemId, g: ElemId) -> ElemId {
        self.act[w as usize * self.group.order() + g as usize]
    }

    #[inline]
    pub fn kappa(&self, w: ElemId) -> ElemId {
        self.kappa[w as usize]
    }

    pub fn kappa_morphism(&self) -> Result<Morphism> {
        Morphism::from_full_map(self.wedge.clone(), self.group.clone(), self.kappa.clone())
    }

    /// ker κ ≅ M(G), as a subgroup of W.
    pub fn schur_multiplier(&self) -> Subgroup {
        let members: Vec<ElemId> =
            self.wedge.elements().filter(|&w| self.kappa[w as usize] == 0).collect();
        subgroup_from_members(&self.wedge, members)
    }

    pub fn schur_multiplier_invariants(&self) -> AbelianInvariants {
        self.schur_multiplier().abelian_invariants()
    }

    /// {g ∈ G : g∧x = 1 for all x}.
    pub fn epicentre(&self) -> Subgroup {
        let n = self.group.order();
        let members: Vec<ElemId> = self
            .group
            .elements()
            .filter(|&g| (0..n as ElemId).all(|x| self.pair(g, x) == 0))
            .collect();
        subgroup_from_members(&self.group, members)
    }

    /// Subgroup of W generated by x∧y over commuting pairs; always ≤ ker κ.
    pub fn mflat(&self) -> Subgroup {
        let mut seeds: Vec<ElemId> = Vec::new();
        let n = self.group.order() as ElemId;
        for x in 0..n {
            for y in 0..n {
                if self.group.mult(x, y) == self.group.mult(y, x) {
                    let w = self.pair(x, y);
                    if w != 0 && !seeds.contains(&w) {
                        seeds.push(w);
                    }
                }
            }
        }
        close_generators(&self.wedge, &seeds, usize::MAX).expect("mflat closure")
    }

    /// B₀(G) = ker κ / M♭(G), reported as abelian invariants.
    pub fn bogomolov(&self) -> AbelianInvariants {
        let m = self.schur_multiplier();
        let mflat = self.mflat();
        let mat = m.materialize();
        let sub_members: Vec<ElemId> = mflat
            .members()
            .iter()
            .map(|&w| mat.ops.from_parent(w).expect("mflat not inside ker kappa"))
            .collect();
        let sub = subgroup_from_members(&mat.view, sub_members);
        let (q, _) = quotient(&mat.view, &sub, usize::MAX).expect("central subgroup");
        group::abelian_invariants_of_abelian(&q)
    }

    /// Check the structural laws: g∧g = 1, κ∘pair = commutator,
    /// biderivation identities, action identities, and the multiplier
    /// being fixed pointwise by the action.  Biderivation checks are
    /// exhaustive for |G| ≤ `exhaustive_cap`, sampled above it.
    pub fn verify(&self, exhaustive_cap: usize) -> Result<()> {
        let g = &self.group;
        let w = &self.wedge;
        let n = g.order() as ElemId;
        let fail = |m: String| Err(Error::HypothesisFailed(m));
        for x in 0..n {
            if self.pair(x, x) != 0 {
                return fail(format!("pair({x},{x}) != 1"));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if self.kappa(self.pair(x, y)) != g.comm(x, y) {
                    return fail(format!("kappa(pair({x},{y})) != [{x},{y}]"));
                }
            }
        }
        // act is a genuine action compatible with pair: (u∧v)^g = u^g∧v^g
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if self.act(self.pair(x, y), z) != self.pair(g.conj(x, z), g.conj(y, z)) {
                        return fail(format!("pair equivariance fails at ({x},{y})^{z}"));
                    }
                }
            }
        }
        // action by products, and each act(·,g) an automorphism of W
        for z in 0..n {
            for z2 in 0..n {
                let zz = g.mult(z, z2);
                for wid in w.elements() {
                    if self.act(self.act(wid, z), z2) != self.act(wid, zz) {
                        return fail("act is not an action".into());
                    }
                }
            }
        }
        for z in 0..n {
            for a in w.elements() {
                for b in w.elements() {
                    if self.act(w.mult(a, b), z) != w.mult(self.act(a, z), self.act(b, z)) {
                        return fail("act(.,g) is not an endomorphism".into());
                    }
                }
            }
        }
        // multiplier central & fixed
        for wid in w.elements() {
            if self.kappa(wid) == 0 {
                for z in 0..n {
                    if self.act(wid, z) != wid {
                        return fail("action moves ker kappa".into());
                    }
                }
            }
        }
        // biderivation laws
        let triples: Vec<(ElemId, ElemId, ElemId)> = if (n as usize) <= exhaustive_cap {
            (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))).collect()
        } else {
            let mut state = 0xdeadbeefu64;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % n as u64) as ElemId
            };
            (0..5000).map(|_| (next(), next(), next())).collect()
        };
        for (gg, h, k) in triples {
            let lhs = self.pair(g.mult(gg, h), k);
            let rhs = w.mult(self.pair(g.conj(gg, h), g.conj(k, h)), self.pair(h, k));
            if lhs != rhs {
                return fail(format!("left biderivation fails at ({gg},{h},{k})"));
            }
            let lhs2 = self.pair(gg, g.mult(h, k));
            let rhs2 = w.mult(self.pair(gg, k), self.pair(g.conj(gg, k), g.conj(h, k)));
            if lhs2 != rhs2 {
                return fail(format!("right biderivation fails at ({gg},{h},{k})"));
            }
        }
        // kappa is a homomorphism
        self.kappa_morphism()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Abelian groups
// ---------------------------------------------------------------------------

/// Dense abelian group on a mixed-radix tuple space (componentwise addition).
pub fn abelian_group_dense(orders: &[u64]) -> GroupView {
    let n: u64 = orders.iter().product::<u64>().max(1);
    let n = n as usize;
    let k = orders.len();
    let decode = |mut id: usize, out: &mut Vec<u64>| {
        out.clear();
        out.resize(k, 0);
        for i in (0..k).rev() {
            out[i] = (id as u64) % orders[i];
            id /= orders[i] as usize;
        }
    };
    let mut table = vec![0u32; n * n];
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for a in 0..n {
        decode(a, &mut xa);
        for b in 0..n {
            decode(b, &mut xb);
            let mut id = 0u64;
            for i in 0..k {
                id = id * orders[i] + (xa[i] + xb[i]) % orders[i];
            }
            table[a * n + b] = id as u32;
        }
    }
    let mut gens = Vec::new();
    let mut shift = n as u64;
    for &o in orders {
        shift /= o;
        if o > 1 {
            gens.push(shift as u32);
        }
    }
    let desc = format!(
        "ab[{}]",
        orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",")
    );
    GroupView::from_dense(table, gens, desc)
}

/// Independent cyclic generators of an abelian group, largest order first
/// (so the first order is the exponent).
pub fn abelian_basis(g: &GroupView) -> Vec<(ElemId, u64)> {
    assert!(g.is_abelian(), "abelian_basis requires an abelian group");
    if g.order() == 1 {
        return vec![];
    }
    let x = g.elements().max_by_key(|&e| g.element_order(e)).unwrap();
    let d = g.element_order(x);
    let h = close_generators(g, &[x], usize::MAX).unwrap();
    let mut out = vec![(x, d)];
    if h.order() == g.order() {
        return out;
    }
    let (q, proj) = quotient(g, &h, usize::MAX).unwrap();
    for (yq, o) in abelian_basis(&q) {
        let y = g.elements().find(|&e| proj.apply(e) == yq).unwrap();
        // correct the lift so its order matches its order in the quotient:
        // y^o = x^k with o | k (since |x| is the exponent), replace
        // y by y*x^(-k/o)
        let yo = g.pow(y, o as i64);
        let mut k = 0u64;
        let mut cur = 0;
        while cur != yo {
            cur = g.mult(cur, x);
            k += 1;
        }
        assert_eq!(k % o, 0, "basis lift correction failed");
        let y2 = g.mult(y, g.pow(x, -((k / o) as i64)));
        debug_assert_eq!(g.element_order(y2), o);
        out.push((y2, o));
    }
    out
}

/// Discrete-log coordinates of every element in the given basis; panics if
/// the basis is not independent and spanning.
pub fn abelian_coords(g: &GroupView, basis: &[(ElemId, u64)]) -> Vec<Vec<u32>> {
    let n = g.order();
    let mut coords: Vec<Option<Vec<u32>>> = vec![None; n];
    let total: u64 = basis.iter().map(|&(_, o)| o).product::<u64>().max(1);
    assert_eq!(total as usize, n, "basis orders do not multiply to |G|");
    let k = basis.len();
    let mut tuple = vec![0u32; k];
    let mut elem: ElemId = 0;
    coords[0] = Some(tuple.clone());
    // iterate mixed-radix counter, updating the element incrementally
    for _ in 1..n {
        let mut i = k;
        loop {
            i -= 1;
            tuple[i] += 1;
            elem = g.mult(elem, basis[i].0);
            if (tuple[i] as u64) < basis[i].1 {
                break;
            }
            // rolled over: subtract the full cycle (elem already wrapped
            // since basis[i].0 has order basis[i].1)
            tuple[i] = 0;
        }
        assert!(coords[elem as usize].is_none(), "basis not independent");
        coords[elem as usize] = Some(tuple.clone());
    }
    coords.into_iter().map(|c| c.unwrap()).collect()
}

/// Closed-form wedge of an abelian group: W = ∏_{i<j} C_gcd(d_i,d_j) on
/// the symbols x_i∧x_j, with pairing exponents a_ib_j − a_jb_i.
pub fn wedge_abelian(g: &GroupView) -> Result<WedgeStructure> {
    if !g.is_abelian() {
        return Err(Error::NotApplicable("wedge_abelian on non-abelian group".into()));
    }
    let basis = abelian_basis(g);
    let coords = abelian_coords(g, &basis);
    let k = basis.len();
    let mut comp_orders = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            comp_orders.push(group::gcd(basis[i].1, basis[j].1));
        }
    }
    let wedge = abelian_group_dense(&comp_orders);
    let model = AbelianModel { basis, coords, comp_orders };
    let n = g.order();
    let mut pair = vec![0u32; n * n];
    let mut comps = vec![0u64; model.comp_orders.len()];
    for a in 0..n {
        for b in 0..n {
            let ca = &model.coords[a];
            let cb = &model.coords[b];
            let mut t = 0;
            for i in 0..k {
                for j in i + 1..k {
                    let m = model.comp_orders[t];
                    let v = (ca[i] as u64 * cb[j] as u64 + m * m
                        - ca[j] as u64 * cb[i] as u64 % (m * m).max(1))
                        % m.max(1);
                    comps[t] = v;
                    t += 1;
                }
            }
            pair[a * n + b] = model.encode_wedge(&comps);
        }
    }
    let act: Vec<u32> = (0..wedge.order() as u32)
        .flat_map(|w| std::iter::repeat(w).take(n))
        .collect();
    let kappa = vec![0u32; wedge.order()];
    Ok(WedgeStructure {
        group: g.clone(),
        wedge,
        pair,
        act,
        kappa,
        strategy: "abelian",
        abelian_model: Some(model),
        cover_link: None,
    })
}

// ---------------------------------------------------------------------------
// Covering groups
// ---------------------------------------------------------------------------

/// W = H′ for a covering group H of G; pair(g,h) = [s(g), s(h)], action by
/// conjugation with lifts, κ the projection.
pub fn wedge_from_cover(cover: Arc<CoverData>) -> Result<WedgeStructure> {
    let g = cover.base.clone();
    let derived = derived_subgroup(&cover.cover);
    let mat = derived.materialize();
    let wedge = mat.view.materialize_dense(DENSE_CUTOFF)?;
    let h_of_w: Vec<ElemId> = (0..wedge.order() as u32).map(|w| mat.ops.to_parent(w)).collect();
    let w_of_h: HashMap<ElemId, ElemId> =
        h_of_w.iter().enumerate().map(|(w, &h)| (h, w as u32)).collect();
    let n = g.order();
    let hh = &cover.cover;
    let mut pair = vec![0u32; n * n];
    for a in 0..n {
        let sa = cover.section[a];
        for b in 0..n {
            let c = hh.comm(sa, cover.section[b]);
            pair[a * n + b] = *w_of_h
                .get(&c)
                .ok_or_else(|| Error::HypothesisFailed("commutator outside H'".into()))?;
        }
    }
    let mut act = vec![0u32; wedge.order() * n];
    for (w, &m) in h_of_w.iter().enumerate() {
        for b in 0..n {
            let c = hh.conj(m, cover.section[b]);
            act[w * n + b] = *w_of_h
                .get(&c)
                .ok_or_else(|| Error::HypothesisFailed("H' not normal?".into()))?;
        }
    }
    let kappa: Vec<u32> = h_of_w.iter().map(|&m| cover.proj.apply(m)).collect();
    Ok(WedgeStructure {
        group: g,
        wedge,
        pair,
        act,
        kappa,
        strategy: "cover",
        abelian_model: None,
        cover_link: Some(CoverLink { data: cover, w_of_h, h_of_w }),
    })
}

// ---------------------------------------------------------------------------
// Direct products
// ---------------------------------------------------------------------------

/// Wedge of G₁×G₂ from the factor wedges:
/// (G₁∧G₁) × (G₂∧G₂) × (G₁ᵃᵇ ⊗ G₂ᵃᵇ), the mixed part bilinear with
/// trivial action and trivial κ.  The product group uses ids a·|G₂|+b, the
/// wedge uses ids (w₁·|W₂|+w₂)·|T|+t.
pub fn wedge_direct_product(w1: &WedgeStructure, w2: &WedgeStructure) -> Result<WedgeStructure> {
    let g1 = &w1.group;
    let g2 = &w2.group;
    let g = group::direct_product(g1, g2);
    let g = if g.order() <= DENSE_CUTOFF { g.materialize_dense(DENSE_CUTOFF)? } else { g };
    // abelianization coords of each factor
    let ab = |gv: &GroupView| -> (Vec<Vec<u32>>, Vec<u64>) {
        let d = derived_subgroup(gv);
        let (q, proj) = quotient(gv, &d, usize::MAX).expect("derived normal");
        let basis = abelian_basis(&q);
        let coords_q = abelian_coords(&q, &basis);
        let coords: Vec<Vec<u32>> =
            gv.elements().map(|x| coords_q[proj.apply(x) as usize].clone()).collect();
        (coords, basis.iter().map(|&(_, o)| o).collect())
    };
    let (c1, d1) = ab(g1);
    let (c2, d2) = ab(g2);
    let mut tensor_orders = Vec::new();
    for &a in &d1 {
        for &b in &d2 {
            tensor_orders.push(group::gcd(a, b));
        }
    }
    let tgroup = abelian_group_dense(&tensor_orders);
    let tsize = tgroup.order() as u64;
    let tencode = |comps: &[u64]| -> u32 {
        let mut id = 0u64;
        for (t, &m) in tensor_orders.iter().enumerate() {
            id = id * m + comps[t] % m.max(1);
        }
        id as u32
    };
    let wb = w2.wedge.order() as u64;
    let wedge = {
        let p = group::direct_product(&group::direct_product(&w1.wedge, &w2.wedge), &tgroup);
        p.materialize_dense(DENSE_CUTOFF)?
    };
    let n = g.order();
    let n2 = g2.order() as u32;
    let encode = |a: u32, b: u32, t: u32| -> u32 { ((a as u64 * wb + b as u64) * tsize + t as u64) as u32 };
    let mut pair = vec![0u32; n * n];
    let mut comps = vec![0u64; tensor_orders.len()];
    for x in 0..n as u32 {
        let (x1, x2) = (x / n2, x % n2);
        for y in 0..n as u32 {
            let (y1, y2) = (y / n2, y % n2);
            let mut t = 0;
            for (i, &da) in d1.iter().enumerate() {
                for (j, &db) in d2.iter().enumerate() {
                    let m = group::gcd(da, db).max(1);
                    // x̄₁⊗ȳ₂ − ȳ₁⊗x̄₂ on component (i,j)
                    comps[t] = (c1[x1 as usize][i] as u64 * c2[y2 as usize][j] as u64 % m + m
                        - c1[y1 as usize][i] as u64 * c2[x2 as usize][j] as u64 % m)
                        % m;
                    t += 1;
                }
            }
            pair[x as usize * n + y as usize] =
                encode(w1.pair(x1, y1), w2.pair(x2, y2), tencode(&comps));
        }
    }
    let wsize = wedge.order();
    let mut act = vec![0u32; wsize * n];
    for w in 0..wsize as u32 {
        let t = w % tsize as u32;
        let b = (w as u64 / tsize) % wb;
        let a = (w as u64 / tsize) / wb;
        for z in 0..n as u32 {
            let (z1, z2) = (z / n2, z % n2);
            act[w as usize * n + z as usize] =
                encode(w1.act(a as u32, z1), w2.act(b as u32, z2), t);
        }
    }
    let kappa: Vec<u32> = (0..wsize as u32)
        .map(|w| {
            let b = ((w as u64 / tsize) % wb) as u32;
            let a = ((w as u64 / tsize) / wb) as u32;
            w1.kappa(a) * n2 + w2.kappa(b)
        })
        .collect();
    Ok(WedgeStructure {
        group: g,
        wedge,
        pair,
        act,
        kappa,
        strategy: "product",
        abelian_model: None,
        cover_link: None,
    })
}

// ---------------------------------------------------------------------------
// Generic crossed pairing
// ---------------------------------------------------------------------------

/// Crossed-pairing presentation of G∧G on symbols w_{g,h} with relations
/// w_{gh,k} = w_{g^h,k^h} w_{h,k},  w_{g,hk} = w_{g,k} w_{g^k,h^k},
/// w_{g,g} = 1, realized by coset enumeration.
pub fn wedge_generic(g: &GroupView, cap: usize) -> Result<WedgeStructure> {
    let (wedge, gen_ids) = crossed_pairing_realize(g, cap, true)?;
    let n = g.order();
    let pair: Vec<u32> = gen_ids.clone();
    // action on W: w_{g,h} ↦ w_{g^k,h^k}, verified as an endomorphism
    let all_gens: Vec<ElemId> = (0..n as u32 * n as u32).map(|i| gen_ids[i as usize]).collect();
    let mut act = vec![0u32; wedge.order() * n];
    for k in 0..n as u32 {
        let images: Vec<ElemId> = (0..n as u32)
            .flat_map(|a| {
                let ga = g.conj(a, k);
                (0..n as u32).map(move |b| (ga, b))
            })
            .map(|(ga, b)| gen_ids[ga as usize * n + g.conj(b, k) as usize])
            .collect();
        let m = Morphism::from_gen_images(&wedge, &all_gens, &images, &wedge)?;
        for w in 0..wedge.order() as u32 {
            act[w as usize * n + k as usize] = m.apply(w);
        }
    }
    // kappa: w_{g,h} ↦ [g,h], verified as a morphism
    let kappa_images: Vec<ElemId> = (0..n as u32)
        .flat_map(|a| (0..n as u32).map(move |b| (a, b)))
        .map(|(a, b)| g.comm(a, b))
        .collect();
    let km = Morphism::from_gen_images(&wedge, &all_gens, &kappa_images, g)?;
    let kappa: Vec<u32> = (0..wedge.order() as u32).map(|w| km.apply(w)).collect();
    Ok(WedgeStructure {
        group: g.clone(),
        wedge,
        pair,
        act,
        kappa,
        strategy: "generic",
        abelian_model: None,
        cover_link: None,
    })
}

/// Shared enumeration for ∧ (with the diagonal relations) and ⊗ (without).
/// Returns the realized group and the element id of each symbol w_{g,h}
/// (row-major g*|G|+h).
fn crossed_pairing_realize(
    g: &GroupView,
    cap: usize,
    diagonal: bool,
) -> Result<(GroupView, Vec<ElemId>)> {
    let n = g.order();
    if n > cap {
        return Err(Error::BudgetExceeded { what: "crossed-pairing |G| cap".into(), limit: cap });
    }
    let idx = |a: u32, b: u32| (a as usize * n + b as usize, 1i64);
    let names: Vec<String> = (0..n as u32)
        .flat_map(|a| (0..n as u32).map(move |b| format!("w{a}_{b}")))
        .collect();
    let mut relators: Vec<Word> = Vec::new();
    if diagonal {
        for a in 0..n as u32 {
            relators.push(Word::from_syllables(vec![idx(a, a)]));
        }
    }
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            let ab = g.mult(a, b);
            for c in 0..n as u32 {
                // w_{ab,c} * w_{b,c}^-1 * w_{a^b,c^b}^-1
                let (i1, _) = idx(ab, c);
                let (i2, _) = idx(b, c);
                let (i3, _) = idx(g.conj(a, b), g.conj(c, b));
                let w = Word::from_syllables(vec![(i1, 1), (i2, -1), (i3, -1)]);
                if !w.is_identity() {
                    relators.push(w);
                }
                // w_{c,ab} * w_{c^b, a^b}^-1 * w_{c,b}^-1
                let (j1, _) = idx(c, ab);
                let (j2, _) = idx(g.conj(c, b), g.conj(a, b));
                let (j3, _) = idx(c, b);
                let w2 = Word::from_syllables(vec![(j1, 1), (j2, -1), (j3, -1)]);
                if !w2.is_identity() {
                    relators.push(w2);
                }
            }
        }
    }
    let p = Presentation::new(names, relators);
    let wedge = realize(&p, DEFAULT_MAX_COSETS, DENSE_CUTOFF)?;
    let gen_ids = wedge.presented_by().unwrap().gen_ids.clone();
    Ok((wedge, gen_ids))
}

/// Non-abelian tensor square G⊗G: same enumeration without w_{g,g} = 1.
pub fn tensor_square(g: &GroupView, cap: usize) -> Result<GroupView> {
    let (t, _) = crossed_pairing_realize(g, cap, false)?;
    Ok(t)
}

// ---------------------------------------------------------------------------
// Strategy selection and cross-validation
// ---------------------------------------------------------------------------

/// Construct a family group together with its wedge, picking the cheapest
/// correct strategy: abelian formula → cover → product split → generic.
pub fn wedge_for(f: &Family) -> Result<WedgeStructure> {
    match f {
        Family::Cyclic(_) | Family::Abelian(_) => {
            let g = crate::constructors::construct(f)?;
            wedge_abelian(&g)
        }
        Family::Product(a, b) => {
            let wa = wedge_for(a)?;
            let wb = wedge_for(b)?;
            wedge_direct_product(&wa, &wb)
        }
        _ => match schur_cover(f) {
            Ok(c) => wedge_from_cover(Arc::new(c)),
            Err(Error::UnsupportedFamily(_)) => {
                let g = crate::constructors::construct(f)?;
                wedge_generic(&g, GENERIC_CAP)
            }
            Err(e) => Err(e),
        },
    }
}

/// Check two wedge structures of the same group agree: the map
/// pair₁(g,h) ↦ pair₂(g,h) extends to an isomorphism W₁→W₂ commuting with
/// κ and the action.
pub fn verify_wedge_agreement(a: &WedgeStructure, b: &WedgeStructure) -> Result<Morphism> {
    let n = a.group.order();
    if n != b.group.order() {
        return Err(Error::HypothesisFailed("different base groups".into()));
    }
    let gens: Vec<ElemId> =
        (0..(n * n) as u32).map(|i| a.pair[i as usize]).collect();
    let images: Vec<ElemId> =
        (0..(n * n) as u32).map(|i| b.pair[i as usize]).collect();
    let m = Morphism::from_gen_images(&a.wedge, &gens, &images, &b.wedge)?;
    if !m.is_bijective() {
        return Err(Error::HypothesisFailed(format!(
            "wedge strategies disagree: |W| {} vs {}",
            a.wedge.order(),
            b.wedge.order()
        )));
    }
    for w in a.wedge.elements() {
        if b.kappa(m.apply(w)) != a.kappa(w) {
            return Err(Error::HypothesisFailed("kappa differs across strategies".into()));
        }
        for z in 0..n as u32 {
            if m.apply(a.act(w, z)) != b.act(m.apply(w), z) {
                return Err(Error::HypothesisFailed("action differs across strategies".into()));
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{construct, schur_cover, Family};

    fn fam(s: &str) -> Family {
        Family::parse(s).unwrap()
    }

    #[test]
    fn abelian_basis_c2c4() {
        let g = construct(&fam("ab:2,4")).unwrap();
        let basis = abelian_basis(&g);
        let mut orders: Vec<u64> = basis.iter().map(|&(_, o)| o).collect();
        orders.sort_unstable();
        assert_eq!(orders, vec![2, 4]);
        let coords = abelian_coords(&g, &basis);
        assert_eq!(coords.len(), 8);
    }

    #[test]
    fn wedge_abelian_c4c4() {
        let g = construct(&fam("ab:4,4")).unwrap();
        let w = wedge_abelian(&g).unwrap();
        assert_eq!(w.wedge.order(), 4);
        assert_eq!(w.schur_multiplier_invariants().factors, vec![4]);
        w.verify(16).unwrap();
        // abelian: mflat = everything, B0 trivial
        assert_eq!(w.mflat().order(), 4);
        assert!(w.bogomolov().factors.is_empty());
    }

    #[test]
    fn wedge_abelian_cyclic_trivial() {
        let g = construct(&fam("c6")).unwrap();
        let w = wedge_abelian(&g).unwrap();
        assert_eq!(w.wedge.order(), 1);
        assert_eq!(w.epicentre().order(), 6);
    }

    #[test]
    fn epicentre_c2c4() {
        let g = construct(&fam("ab:2,4")).unwrap();
        let w = wedge_abelian(&g).unwrap();
        assert_eq!(w.wedge.order(), 2);
        assert_eq!(w.epicentre().order(), 2);
    }

    #[test]
    fn wedge_cover_sym4() {
        let c = schur_cover(&fam("sym4")).unwrap();
        let w = wedge_from_cover(Arc::new(c)).unwrap();
        assert_eq!(w.wedge.order(), 24); // |Alt4| * |C2|
        assert_eq!(w.schur_multiplier().order(), 2);
        w.verify(24).unwrap();
    }

    #[test]
    fn wedge_cover_q8() {
        let c = schur_cover(&fam("q8")).unwrap();
        let w = wedge_from_cover(Arc::new(c)).unwrap();
        assert_eq!(w.wedge.order(), 2);
        assert!(w.schur_multiplier().is_trivial());
        // M_flat = ker kappa (trivially) so B0 = 1
        assert!(w.bogomolov().factors.is_empty());
        w.verify(8).unwrap();
    }

    #[test]
    fn wedge_cover_extraspecial27() {
        let c = schur_cover(&fam("extraspecial:3,1,+")).unwrap();
        let w = wedge_from_cover(Arc::new(c)).unwrap();
        assert_eq!(w.wedge.order(), 27);
        assert_eq!(w.schur_multiplier_invariants().factors, vec![3, 3]);
        w.verify(27).unwrap();
        assert!(w.bogomolov().factors.is_empty());
    }

    #[test]
    fn generic_matches_abelian_klein() {
        let g = construct(&fam("ab:2,2")).unwrap();
        let wa = wedge_abelian(&g).unwrap();
        let wg = wedge_generic(&g, GENERIC_CAP).unwrap();
        assert_eq!(wg.wedge.order(), 2);
        wg.verify(4).unwrap();
        verify_wedge_agreement(&wa, &wg).unwrap();
    }

    #[test]
    fn generic_matches_cover_sym3() {
        let c = schur_cover(&fam("sym3")).unwrap();
        let wc = wedge_from_cover(Arc::new(c)).unwrap();
        let wg = wedge_generic(&wc.group, GENERIC_CAP).unwrap();
        assert_eq!(wg.wedge.order(), 3);
        assert!(wg.schur_multiplier().is_trivial());
        verify_wedge_agreement(&wc, &wg).unwrap();
    }

    #[test]
    fn product_wedge_c3_alt4() {
        let w1 = wedge_for(&fam("c3")).unwrap();
        let w2 = wedge_for(&fam("alt4")).unwrap();
        assert_eq!(w2.wedge.order(), 8);
        let w = wedge_direct_product(&w1, &w2).unwrap();
        assert_eq!(w.group.order(), 36);
        assert_eq!(w.wedge.order(), 24); // 1 * 8 * |C3 ⊗ C3|
        w.verify(16).unwrap();
    }

    #[test]
    fn product_wedge_klein_from_factors() {
        let w1 = wedge_for(&fam("c2")).unwrap();
        let w = wedge_direct_product(&w1, &w1).unwrap();
        assert_eq!(w.wedge.order(), 2); // mixed part only
        let g = construct(&fam("ab:2,2")).unwrap();
        let wa = wedge_abelian(&g).unwrap();
        assert_eq!(wa.wedge.order(), w.wedge.order());
        w.verify(4).unwrap();
    }

    #[test]
    fn tensor_square_small() {
        let c2 = construct(&fam("c2")).unwrap();
        let t = tensor_square(&c2, GENERIC_CAP).unwrap();
        assert_eq!(t.order(), 2);
        let klein = construct(&fam("ab:2,2")).unwrap();
        let t = tensor_square(&klein, GENERIC_CAP).unwrap();
        assert_eq!(t.order(), 16);
    }

    #[test]
    fn mflat_sym3_trivial() {
        let w = wedge_for(&fam("sym3")).unwrap();
        assert!(w.mflat().is_trivial());
        assert!(w.bogomolov().factors.is_empty());
    }
}
