//! Standard group families, built from presentations and realized by coset
//! enumeration, plus covering groups with a verified central extension
//! structure.

use crate::error::{Error, Result};
use crate::group::{
    self, direct_product, ElemId, GroupView, Morphism, Subgroup, DENSE_CUTOFF,
};
use crate::presentation::{parse_presentation, Presentation};
use crate::todd_coxeter::{eval_word, realize, DEFAULT_MAX_COSETS};
use crate::words::Word;

/// A descriptor for a supported group family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Cyclic(u64),
    /// Direct product of cyclic groups with the given orders.
    Abelian(Vec<u64>),
    Dihedral(u64),     // order 2n, parameter n >= 1
    Quaternion(u64),   // order 4n, parameter n >= 2 (Q8 = Quaternion(2))
    Symmetric(u32),
    Alternating(u32),
    /// Extraspecial p-group of order p^(2n+1); `plus` selects exponent p
    /// (for odd p); `plus=false` gives exponent p^2.
    Extraspecial { p: u64, n: u32, plus: bool },
    /// Metacyclic group <a,b | a^m, b^n, a^b = a^r> with m odd,
    /// gcd(m, n(r-1)) = 1, r^n = 1 mod m.
    Holder { m: u64, n: u64, r: u64 },
    Product(Box<Family>, Box<Family>),
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Cyclic(n) => write!(f, "c{n}"),
            Family::Abelian(ds) => write!(
                f,
                "ab:{}",
                ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            ),
            Family::Dihedral(n) => write!(f, "d{}", 2 * n),
            Family::Quaternion(n) => write!(f, "q{}", 4 * n),
            Family::Symmetric(n) => write!(f, "sym{n}"),
            Family::Alternating(n) => write!(f, "alt{n}"),
            Family::Extraspecial { p, n, plus } => {
                write!(f, "extraspecial:{},{},{}", p, n, if *plus { "+" } else { "-" })
            }
            Family::Holder { m, n, r } => write!(f, "holder:{m},{n},{r}"),
            Family::Product(a, b) => write!(f, "product:({a})x({b})"),
        }
    }
}

impl Family {
    /// Parse a descriptor like `sym4`, `c12`, `d8`, `q8`, `alt5`,
    /// `ab:2,4,4`, `holder:5,4,2`, `extraspecial:3,1,+`,
    /// `product:(sym3)x(c4)`.
    pub fn parse(s: &str) -> Result<Family> {
        let bad = |msg: &str| Error::UnsupportedFamily(format!("{s}: {msg}"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("product:") {
            let rest = rest.trim();
            // split (A)x(B) at the top-level 'x'
            let bytes = rest.as_bytes();
            if !rest.starts_with('(') {
                return Err(bad("expected product:(A)x(B)"));
            }
            let mut depth = 0usize;
            let mut split = None;
            for (i, &b) in bytes.iter().enumerate() {
                match b {
                    b'(' => depth += 1,
                    b')' => {
                        depth = depth.checked_sub(1).ok_or_else(|| bad("unbalanced parens"))?;
                        if depth == 0 {
                            split = Some(i);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let i = split.ok_or_else(|| bad("unbalanced parens"))?;
            let left = &rest[1..i];
            let tail = rest[i + 1..].trim_start();
            let tail = tail.strip_prefix('x').ok_or_else(|| bad("expected 'x' between factors"))?;
            let tail = tail.trim();
            let right = tail
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| bad("expected parenthesized second factor"))?;
            return Ok(Family::Product(
                Box::new(Family::parse(left)?),
                Box::new(Family::parse(right)?),
            ));
        }
        if let Some(rest) = s.strip_prefix("abelian:").or_else(|| s.strip_prefix("ab:")) {
            let ds: Vec<u64> = rest
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| bad("bad integer")))
                .collect::<Result<_>>()?;
            if ds.is_empty() || ds.iter().any(|&d| d == 0) {
                return Err(bad("orders must be positive"));
            }
            return Ok(Family::Abelian(ds));
        }
        if let Some(rest) = s.strip_prefix("holder:") {
            let parts: Vec<u64> = rest
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| bad("bad integer")))
                .collect::<Result<_>>()?;
            if parts.len() != 3 {
                return Err(bad("expected holder:m,n,r"));
            }
            let fam = Family::Holder { m: parts[0], n: parts[1], r: parts[2] };
            validate_holder(parts[0], parts[1], parts[2])?;
            return Ok(fam);
        }
        if let Some(rest) = s.strip_prefix("extraspecial:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad("expected extraspecial:p,n,+|-"));
            }
            let p: u64 = parts[0].parse().map_err(|_| bad("bad prime"))?;
            let n: u32 = parts[1].parse().map_err(|_| bad("bad n"))?;
            let plus = match parts[2] {
                "+" => true,
                "-" => false,
                _ => return Err(bad("type must be + or -")),
            };
            if !is_prime(p) || n == 0 {
                return Err(bad("p must be prime and n >= 1"));
            }
            return Ok(Family::Extraspecial { p, n, plus });
        }
        for (prefix, f) in [
            ("cyclic:", 0u8),
            ("dihedral:", 1),
            ("quaternion:", 2),
            ("symmetric:", 3),
            ("alternating:", 4),
        ] {
            if let Some(rest) = s.strip_prefix(prefix) {
                let v: u64 = rest.trim().parse().map_err(|_| bad("bad integer"))?;
                return numeric_family(f, v).ok_or_else(|| bad("parameter out of range"));
            }
        }
        for (prefix, f) in [("c", 0u8), ("d", 1), ("q", 2), ("sym", 3), ("alt", 4)] {
            if let Some(rest) = s.strip_prefix(prefix) {
                if let Ok(v) = rest.parse::<u64>() {
                    // shorthand d<order>, q<order> take the group order
                    let v = match f {
                        1 => {
                            if v % 2 != 0 || v < 2 {
                                return Err(bad("dihedral order must be even"));
                            }
                            v / 2
                        }
                        2 => {
                            if v % 4 != 0 || v < 8 {
                                return Err(bad("quaternion order must be a multiple of 4, >= 8"));
                            }
                            v / 4
                        }
                        _ => v,
                    };
                    return numeric_family(f, v).ok_or_else(|| bad("parameter out of range"));
                }
            }
        }
        Err(bad("unrecognized family"))
    }

    pub fn order(&self) -> u64 {
        match self {
            Family::Cyclic(n) => *n,
            Family::Abelian(ds) => ds.iter().product(),
            Family::Dihedral(n) => 2 * n,
            Family::Quaternion(n) => 4 * n,
            Family::Symmetric(n) => factorial(*n as u64),
            Family::Alternating(n) => factorial(*n as u64) / 2,
            Family::Extraspecial { p, n, .. } => p.pow(2 * n + 1),
            Family::Holder { m, n, .. } => m * n,
            Family::Product(a, b) => a.order() * b.order(),
        }
    }
}

fn numeric_family(code: u8, v: u64) -> Option<Family> {
    match code {
        0 if v >= 1 => Some(Family::Cyclic(v)),
        1 if v >= 1 => Some(Family::Dihedral(v)),
        2 if v >= 2 => Some(Family::Quaternion(v)),
        3 if (1..=6).contains(&v) => Some(Family::Symmetric(v as u32)),
        4 if (3..=6).contains(&v) => Some(Family::Alternating(v as u32)),
        _ => None,
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn validate_holder(m: u64, n: u64, r: u64) -> Result<()> {
    let fail = |msg: String| Err(Error::ParameterViolation(msg));
    if m == 0 || n == 0 {
        return fail("m, n must be positive".into());
    }
    if m % 2 == 0 {
        return fail(format!("m = {m} must be odd"));
    }
    if r >= m.max(1) {
        return fail(format!("require r < m (got r = {r}, m = {m})"));
    }
    if pow_mod(r, n, m.max(2)) % m.max(1) != 1 % m {
        return fail(format!("r^n = {r}^{n} is not 1 mod {m}"));
    }
    let g = group::gcd(m, n * (r + m - 1) % m.max(1));
    // gcd(m, n(r-1)): compute without reduction mistakes for m=1
    let g2 = group::gcd(m, n) ;
    let g3 = group::gcd(m, (r + m - 1) % m.max(1));
    let _ = g;
    if m > 1 && (g2 != 1 || g3 != 1) {
        return fail(format!("gcd(m, n(r-1)) must be 1 (m={m}, n={n}, r={r})"));
    }
    Ok(())
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Presentations per family
// ---------------------------------------------------------------------------

/// Defining presentation of a family member.
pub fn family_presentation(f: &Family) -> Result<Presentation> {
    let text = match f {
        Family::Cyclic(n) => format!("gens: a\nrels: a^{n}"),
        Family::Abelian(ds) => {
            let gens: Vec<String> = (0..ds.len()).map(|i| format!("x{}", i + 1)).collect();
            let mut rels: Vec<String> =
                ds.iter().enumerate().map(|(i, d)| format!("{}^{}", gens[i], d)).collect();
            for i in 0..ds.len() {
                for j in i + 1..ds.len() {
                    rels.push(format!("[{},{}]", gens[i], gens[j]));
                }
            }
            format!("gens: {}\nrels: {}", gens.join(" "), rels.join(", "))
        }
        Family::Dihedral(n) => format!("gens: a b\nrels: a^{n}, b^2, a^b * a"),
        Family::Quaternion(n) => {
            format!("gens: a b\nrels: a^{}, a^{} = b^2, a^b = a^-1", 2 * n, n)
        }
        Family::Symmetric(n) => symmetric_presentation(*n),
        Family::Alternating(n) => alternating_presentation(*n)?,
        Family::Extraspecial { p, n, plus } => extraspecial_presentation(*p, *n, *plus)?,
        Family::Holder { m, n, r } => {
            validate_holder(*m, *n, *r)?;
            format!("gens: a b\nrels: a^{m}, b^{n}, a^b = a^{r}")
        }
        Family::Product(a, b) => {
            return Err(Error::UnsupportedFamily(format!(
                "no single presentation kept for product family {a} x {b}; construct directly"
            )));
        }
    };
    parse_presentation(&text)
}

fn symmetric_presentation(n: u32) -> String {
    // Coxeter presentation on adjacent transpositions
    if n <= 1 {
        return "gens: s1\nrels: s1".to_string();
    }
    let gens: Vec<String> = (1..n).map(|i| format!("s{i}")).collect();
    let mut rels: Vec<String> = gens.iter().map(|g| format!("{g}^2")).collect();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let m = if j == i + 1 { 3 } else { 2 };
            rels.push(format!("({}*{})^{}", gens[i], gens[j], m));
        }
    }
    format!("gens: {}\nrels: {}", gens.join(" "), rels.join(", "))
}

fn alternating_presentation(n: u32) -> Result<String> {
    // standard presentations on 3-cycles for small n
    Ok(match n {
        3 => "gens: a\nrels: a^3".to_string(),
        4 => "gens: a b\nrels: a^3, b^3, (a*b)^2".to_string(),
        5 => "gens: a b\nrels: a^3, b^5, (a*b)^2".to_string(),
        6 => "gens: a b\nrels: a^4, b^5, (a*b)^5, (a^-1*b*a*b)^2, (b^-1*a*b*a)^2"
            .to_string(),
        _ => return Err(Error::UnsupportedFamily(format!("alt{n}"))),
    })
}

fn extraspecial_presentation(p: u64, n: u32, plus: bool) -> Result<String> {
    if p == 2 {
        return Err(Error::UnsupportedFamily(
            "extraspecial 2-groups are handled as d8/q8 central products; use those".into(),
        ));
    }
    let mut gens: Vec<String> = (1..=2 * n).map(|i| format!("g{i}")).collect();
    gens.push("z".to_string());
    let mut rels: Vec<String> = Vec::new();
    for i in 1..=n {
        // [g_{2i}, g_{2i-1}] = z^-1, i.e. z = [g_{2i-1}, g_{2i}]
        rels.push(format!("[g{},g{}] = z", 2 * i - 1, 2 * i));
    }
    // all other pairs commute, z central
    for i in 1..=2 * n {
        for j in i + 1..=2 * n {
            if j == i + 1 && i % 2 == 1 {
                continue;
            }
            rels.push(format!("[g{i},g{j}]"));
        }
        rels.push(format!("[g{i},z]"));
    }
    rels.push(format!("z^{p}"));
    if plus {
        for i in 1..=2 * n {
            rels.push(format!("g{i}^{p}"));
        }
    } else {
        rels.push(format!("g1^{p} = z"));
        for i in 2..=2 * n {
            rels.push(format!("g{i}^{p}"));
        }
    }
    Ok(format!("gens: {}\nrels: {}", gens.join(" "), rels.join(", ")))
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Construct a family member as a realized [`GroupView`], checking that the
/// enumeration produced the expected order.
pub fn construct(f: &Family) -> Result<GroupView> {
    construct_with(f, DEFAULT_MAX_COSETS, DENSE_CUTOFF)
}

pub fn construct_with(f: &Family, max_cosets: usize, dense_cutoff: usize) -> Result<GroupView> {
    let g = match f {
        Family::Product(a, b) => {
            let ga = construct_with(a, max_cosets, dense_cutoff)?;
            let gb = construct_with(b, max_cosets, dense_cutoff)?;
            let p = direct_product(&ga, &gb);
            if p.order() <= dense_cutoff {
                p.materialize_dense(dense_cutoff)?
            } else {
                p
            }
        }
        _ => {
            let p = family_presentation(f)?;
            realize(&p, max_cosets, dense_cutoff)?
        }
    };
    if g.order() as u64 != f.order() {
        return Err(Error::HypothesisFailed(format!(
            "{f}: realized order {} but expected {}",
            g.order(),
            f.order()
        )));
    }
    Ok(g)
}

/// Construct from a user-supplied presentation text, with order check left
/// to the caller.
pub fn construct_presented(text: &str, max_cosets: usize, dense_cutoff: usize) -> Result<GroupView> {
    let p = parse_presentation(text)?;
    realize(&p, max_cosets, dense_cutoff)
}

// ---------------------------------------------------------------------------
// Covering groups
// ---------------------------------------------------------------------------

/// A covering group H of G: a central extension 1 -> M -> H -> G -> 1 with
/// M <= Z(H) cap H', M the full multiplier.  All structural claims are
/// verified at construction time.
pub struct CoverData {
    pub base: GroupView,
    pub cover: GroupView,
    /// projection H -> G
    pub proj: Morphism,
    /// kernel of the projection, = the multiplier subgroup inside H
    pub multiplier: Subgroup,
    /// a section s: G -> H of proj with s(1) = 1 (not a homomorphism in
    /// general); `section[g]` is an element of H mapping to g.
    pub section: Vec<ElemId>,
}

impl CoverData {
    fn verify(&self) -> Result<()> {
        if !self.proj.is_surjective() {
            return Err(Error::HypothesisFailed("cover projection not surjective".into()));
        }
        if self.proj.kernel().members() != self.multiplier.members() {
            return Err(Error::HypothesisFailed("multiplier != kernel of projection".into()));
        }
        if !self.multiplier.is_central() {
            return Err(Error::HypothesisFailed("multiplier not central in cover".into()));
        }
        let derived = group::derived_subgroup(&self.cover);
        if !self.multiplier.members().iter().all(|&m| derived.contains(m)) {
            return Err(Error::HypothesisFailed("multiplier not inside derived subgroup".into()));
        }
        if self.section[0] != 0 {
            return Err(Error::HypothesisFailed("section does not fix the identity".into()));
        }
        for g in self.base.elements() {
            if self.proj.apply(self.section[g as usize]) != g {
                return Err(Error::HypothesisFailed("section is not a right inverse".into()));
            }
        }
        Ok(())
    }
}

/// Build a covering group for the supported families.  Returns the verified
/// extension data.
pub fn schur_cover(f: &Family) -> Result<CoverData> {
    schur_cover_with(f, DEFAULT_MAX_COSETS, DENSE_CUTOFF)
}

pub fn schur_cover_with(f: &Family, max_cosets: usize, dense_cutoff: usize) -> Result<CoverData> {
    match f {
        // trivial multiplier: the group is its own cover
        Family::Cyclic(_) | Family::Quaternion(_) | Family::Holder { .. } => {
            let g = construct_with(f, max_cosets, dense_cutoff)?;
            self_cover(g)
        }
        Family::Symmetric(n) if *n <= 3 => {
            let g = construct_with(f, max_cosets, dense_cutoff)?;
            self_cover(g)
        }
        Family::Alternating(3) => {
            let g = construct_with(f, max_cosets, dense_cutoff)?;
            self_cover(g)
        }
        Family::Dihedral(n) => {
            if n % 2 == 1 {
                let g = construct_with(f, max_cosets, dense_cutoff)?;
                self_cover(g)
            } else {
                // cover of D_2n (n even) is the dicyclic group of order 4n
                let cover_p = parse_presentation(&format!(
                    "gens: a b\nrels: a^{}, a^{} = b^2, a^b = a^-1",
                    2 * n,
                    n
                ))
                .unwrap();
                cover_from_presentations(f, &cover_p, max_cosets, dense_cutoff)
            }
        }
        Family::Symmetric(n) => {
            // double cover: Coxeter-like presentation with a central sign z
            let gens: Vec<String> = (1..*n).map(|i| format!("s{i}")).collect();
            let mut rels: Vec<String> = Vec::new();
            for g in &gens {
                rels.push(format!("{g}^2 = z"));
            }
            for i in 0..gens.len() {
                for j in i + 1..gens.len() {
                    if j == i + 1 {
                        rels.push(format!("({}*{})^3 = z", gens[i], gens[j]));
                    } else {
                        rels.push(format!("({}*{})^2 = z", gens[i], gens[j]));
                    }
                }
            }
            rels.push("z^2".to_string());
            for g in &gens {
                rels.push(format!("[{g},z]"));
            }
            let text = format!("gens: {} z\nrels: {}", gens.join(" "), rels.join(", "));
            let cover_p = parse_presentation(&text).unwrap();
            cover_from_presentations(f, &cover_p, max_cosets, dense_cutoff)
        }
        Family::Alternating(n @ (4 | 5)) => {
            // double cover presentations
            let text = match n {
                4 => "gens: a b z\nrels: a^3 = z, b^3 = z, (a*b)^2 = z, z^2, [a,z], [b,z]",
                5 => "gens: a b z\nrels: a^3 = z, b^5 = z, (a*b)^2 = z, z^2, [a,z], [b,z]",
                _ => unreachable!(),
            };
            let cover_p = parse_presentation(text).unwrap();
            cover_from_presentations(f, &cover_p, max_cosets, dense_cutoff)
        }
        Family::Abelian(ds) => abelian_cover(ds, max_cosets, dense_cutoff),
        Family::Extraspecial { p, n, plus } => extraspecial_cover(*p, *n, *plus, max_cosets, dense_cutoff),
        Family::Product(a, b) => {
            if group::gcd(a.order(), b.order()) != 1 {
                return Err(Error::UnsupportedFamily(format!(
                    "cover of non-coprime product {a} x {b}"
                )));
            }
            let ca = schur_cover_with(a, max_cosets, dense_cutoff)?;
            let cb = schur_cover_with(b, max_cosets, dense_cutoff)?;
            product_cover(ca, cb, dense_cutoff)
        }
        _ => Err(Error::UnsupportedFamily(format!("cover of {f}"))),
    }
}

/// Wrap a group with trivial multiplier as its own cover.
pub fn self_cover(g: GroupView) -> Result<CoverData> {
    let data = CoverData {
        base: g.clone(),
        cover: g.clone(),
        proj: Morphism::identity(&g),
        multiplier: group::trivial_subgroup(&g),
        section: g.elements().collect(),
    };
    data.verify()?;
    Ok(data)
}

/// Realize the cover from its presentation; the base generators are the
/// images of the cover's generators under killing the multiplier part.
/// Requires that the cover presentation's first `k` generators map onto the
/// base's `k` presentation generators in order.
fn cover_from_presentations(
    f: &Family,
    cover_p: &Presentation,
    max_cosets: usize,
    dense_cutoff: usize,
) -> Result<CoverData> {
    let base = construct_with(f, max_cosets, dense_cutoff)?;
    let cover = realize(cover_p, max_cosets, dense_cutoff)?;
    let base_pb = base.presented_by().expect("family groups carry presentations").clone();
    let cover_pb = cover.presented_by().unwrap().clone();
    let k = base_pb.gen_ids.len();
    assert!(cover_pb.gen_ids.len() >= k);
    // map cover generator i -> base generator i (extra cover generators,
    // e.g. the central sign, map to the identity)
    let mut images: Vec<ElemId> = vec![0; cover_pb.gen_ids.len()];
    images[..k].copy_from_slice(&base_pb.gen_ids);
    let proj = Morphism::from_gen_images(&cover, &cover_pb.gen_ids, &images_eval(&base, &images, &cover_pb, &base_pb), &base)?;
    finish_cover(base, cover, proj)
}

fn images_eval(
    _base: &GroupView,
    images: &[ElemId],
    _cover_pb: &crate::group::PresentedBy,
    _base_pb: &crate::group::PresentedBy,
) -> Vec<ElemId> {
    images.to_vec()
}

fn finish_cover(base: GroupView, cover: GroupView, proj: Morphism) -> Result<CoverData> {
    let multiplier = proj.kernel();
    let mut section = vec![ElemId::MAX; base.order()];
    section[0] = 0;
    for h in cover.elements() {
        let g = proj.apply(h) as usize;
        if section[g] == ElemId::MAX {
            section[g] = h;
        }
    }
    let data = CoverData { base, cover, proj, multiplier, section };
    data.verify()?;
    Ok(data)
}

/// Cover of an abelian group written as invariant factors d1 | d2 | ...:
/// adjoin central commutators [xi,xj] of order gcd(di,dj).
fn abelian_cover(ds: &[u64], max_cosets: usize, dense_cutoff: usize) -> Result<CoverData> {
    let inv = group::AbelianInvariants::from_cyclic_orders(ds);
    let ds = &inv.factors;
    if ds.len() <= 1 {
        let g = construct_with(&Family::Abelian(if ds.is_empty() { vec![1] } else { ds.clone() }), max_cosets, dense_cutoff)?;
        return self_cover(g);
    }
    let k = ds.len();
    let gens: Vec<String> = (0..k).map(|i| format!("x{}", i + 1)).collect();
    let mut cnames: Vec<String> = Vec::new();
    let mut rels: Vec<String> = Vec::new();
    for (i, d) in ds.iter().enumerate() {
        rels.push(format!("{}^{}", gens[i], d));
    }
    for i in 0..k {
        for j in i + 1..k {
            let name = format!("m{}_{}", i + 1, j + 1);
            let d = group::gcd(ds[i], ds[j]);
            rels.push(format!("[{},{}] = {}", gens[i], gens[j], name));
            rels.push(format!("{name}^{d}"));
            cnames.push(name);
        }
    }
    let all: Vec<String> = gens.iter().chain(cnames.iter()).cloned().collect();
    for c in &cnames {
        for a in &all {
            if a != c {
                rels.push(format!("[{c},{a}]"));
            }
        }
    }
    let text = format!("gens: {}\nrels: {}", all.join(" "), rels.join(", "));
    let cover_p = parse_presentation(&text).unwrap();
    let base = construct_with(&Family::Abelian(ds.clone()), max_cosets, dense_cutoff)?;
    let cover = realize(&cover_p, max_cosets, dense_cutoff)?;
    let base_pb = base.presented_by().unwrap().clone();
    let cover_pb = cover.presented_by().unwrap().clone();
    let mut images = vec![0 as ElemId; cover_pb.gen_ids.len()];
    images[..k].copy_from_slice(&base_pb.gen_ids);
    let proj = Morphism::from_gen_images(&cover, &cover_pb.gen_ids, &images, &base)?;
    finish_cover(base, cover, proj)
}

/// Cover of an extraspecial p-group of exponent p (p odd).  For n = 1 the
/// multiplier is C_p x C_p; for general n it is elementary abelian of rank
/// 2n^2 - n - 1... built by adjoining central generators for each
/// off-diagonal commutator pair plus the relations forcing commutators of
/// the centre generator.
fn extraspecial_cover(
    p: u64,
    n: u32,
    plus: bool,
    max_cosets: usize,
    dense_cutoff: usize,
) -> Result<CoverData> {
    if !plus {
        return Err(Error::UnsupportedFamily(
            "cover construction kept only for exponent-p extraspecial groups".into(),
        ));
    }
    if n != 1 {
        return Err(Error::UnsupportedFamily(
            "extraspecial cover kept for n = 1 only".into(),
        ));
    }
    // Cover of the Heisenberg group of order p^3 (p odd): order p^5 with
    // multiplier C_p x C_p generated by [z, g1] and [z, g2].
    let text = format!(
        "gens: g1 g2 z h1 h2\nrels: \
         [g1,g2] = z, [z,g1] = h1, [z,g2] = h2, \
         g1^{p}, g2^{p}, z^{p}, h1^{p}, h2^{p}, \
         [h1,g1], [h1,g2], [h1,z], [h1,h2], [h2,g1], [h2,g2], [h2,z]"
    );
    let cover_p = parse_presentation(&text).unwrap();
    let f = Family::Extraspecial { p, n, plus };
    let base = construct_with(&f, max_cosets, dense_cutoff)?;
    let cover = realize(&cover_p, max_cosets, dense_cutoff)?;
    if cover.order() as u64 != p.pow(5) {
        return Err(Error::HypothesisFailed(format!(
            "Heisenberg cover realized order {} but expected {}",
            cover.order(),
            p.pow(5)
        )));
    }
    let base_pb = base.presented_by().unwrap().clone();
    let cover_pb = cover.presented_by().unwrap().clone();
    // base generators: g1, g2, z; cover extras h1, h2 -> identity
    let mut images = vec![0 as ElemId; cover_pb.gen_ids.len()];
    images[..base_pb.gen_ids.len()].copy_from_slice(&base_pb.gen_ids);
    let proj = Morphism::from_gen_images(&cover, &cover_pb.gen_ids, &images, &base)?;
    finish_cover(base, cover, proj)
}

/// Cover of a coprime direct product: the product of the covers.
fn product_cover(ca: CoverData, cb: CoverData, dense_cutoff: usize) -> Result<CoverData> {
    let base = {
        let p = direct_product(&ca.base, &cb.base);
        if p.order() <= dense_cutoff { p.materialize_dense(dense_cutoff)? } else { p }
    };
    let cover = {
        let p = direct_product(&ca.cover, &cb.cover);
        if p.order() <= dense_cutoff { p.materialize_dense(dense_cutoff)? } else { p }
    };
    let nb_base = cb.base.order() as u32;
    let nb_cover = cb.cover.order() as u32;
    // componentwise projection
    let map: Vec<ElemId> = cover
        .elements()
        .map(|h| {
            let (h1, h2) = (h / nb_cover, h % nb_cover);
            ca.proj.apply(h1) * nb_base + cb.proj.apply(h2)
        })
        .collect();
    let proj = Morphism::from_full_map(cover.clone(), base.clone(), map)?;
    let mut section = vec![ElemId::MAX; base.order()];
    for g in base.elements() {
        let (g1, g2) = (g / nb_base, g % nb_base);
        section[g as usize] = ca.section[g1 as usize] * nb_cover + cb.section[g2 as usize];
    }
    let multiplier = proj.kernel();
    let data = CoverData { base, cover, proj, multiplier, section };
    data.verify()?;
    Ok(data)
}

/// Evaluate a presentation word at the base group's realized generators.
pub fn eval_in(g: &GroupView, w: &Word) -> ElemId {
    let pb = g.presented_by().expect("group has no attached presentation");
    eval_word(g, &pb.gen_ids, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{abelian_invariants, center, derived_subgroup, order_stats};

    #[test]
    fn family_parse_roundtrip() {
        for s in ["c12", "d8", "q8", "sym4", "alt5", "ab:2,4", "holder:5,4,2", "extraspecial:3,1,+"] {
            let f = Family::parse(s).unwrap();
            let _ = f.order();
        }
        assert!(Family::parse("holder:4,2,1").is_err()); // m even
        assert!(Family::parse("sym9").is_err());
        assert!(Family::parse("frobnicate:3").is_err());
        let f = Family::parse("product:(sym3)x(c4)").unwrap();
        assert_eq!(f.order(), 24);
    }

    #[test]
    fn construct_orders() {
        for (s, n) in [("c6", 6), ("d8", 8), ("q8", 8), ("sym4", 24), ("alt4", 12), ("ab:2,4", 8)] {
            let g = construct(&Family::parse(s).unwrap()).unwrap();
            assert_eq!(g.order(), n, "{s}");
        }
    }

    #[test]
    fn symmetric_structure() {
        let s4 = construct(&Family::Symmetric(4)).unwrap();
        assert_eq!(derived_subgroup(&s4).order(), 12);
        assert_eq!(center(&s4).order(), 1);
        assert_eq!(abelian_invariants(&s4).factors, vec![2]);
        let stats = order_stats(&s4);
        // Sym4 class sizes: 1, 3, 6, 6, 8
        assert_eq!(stats.class_sizes, vec![1, 3, 6, 6, 8]);
    }

    #[test]
    fn extraspecial_27() {
        let e = construct(&Family::Extraspecial { p: 3, n: 1, plus: true }).unwrap();
        assert_eq!(e.order(), 27);
        assert_eq!(order_stats(&e).exponent, 3);
        let e2 = construct(&Family::Extraspecial { p: 3, n: 1, plus: false }).unwrap();
        assert_eq!(e2.order(), 27);
        assert_eq!(order_stats(&e2).exponent, 9);
        assert_eq!(center(&e).order(), 3);
    }

    #[test]
    fn holder_group_structure() {
        // <a,b | a^5, b^4, a^b = a^2>: order 20, derived = C5, trivial centre
        let g = construct(&Family::Holder { m: 5, n: 4, r: 2 }).unwrap();
        assert_eq!(g.order(), 20);
        assert_eq!(derived_subgroup(&g).order(), 5);
        assert_eq!(center(&g).order(), 1);
    }

    #[test]
    fn cover_dihedral_even() {
        let c = schur_cover(&Family::Dihedral(4)).unwrap();
        assert_eq!(c.base.order(), 8);
        assert_eq!(c.cover.order(), 16);
        assert_eq!(c.multiplier.order(), 2);
    }

    #[test]
    fn cover_sym4_order_48() {
        let c = schur_cover(&Family::Symmetric(4)).unwrap();
        assert_eq!(c.cover.order(), 48);
        assert_eq!(c.multiplier.order(), 2);
        // the cover of Sym4 here has quaternion Sylow 2-subgroups: unique involution
        // in the preimage of a Klein subgroup -- check the centre is exactly M
        assert!(c.multiplier.is_central());
    }

    #[test]
    fn cover_alt5_is_sl25() {
        let c = schur_cover(&Family::Alternating(5)).unwrap();
        assert_eq!(c.cover.order(), 120);
        assert_eq!(c.multiplier.order(), 2);
        assert_eq!(derived_subgroup(&c.cover).order(), 120); // perfect
    }

    #[test]
    fn cover_abelian_rank2() {
        let c = schur_cover(&Family::Abelian(vec![4, 4])).unwrap();
        assert_eq!(c.base.order(), 16);
        assert_eq!(c.multiplier.order(), 4); // gcd(4,4)
        assert_eq!(c.cover.order(), 64);
    }

    #[test]
    fn cover_heisenberg() {
        let c = schur_cover(&Family::Extraspecial { p: 3, n: 1, plus: true }).unwrap();
        assert_eq!(c.cover.order(), 243);
        assert_eq!(c.multiplier.order(), 9);
        assert_eq!(c.multiplier.abelian_invariants().factors, vec![3, 3]);
    }

    #[test]
    fn cover_coprime_product() {
        let f = Family::Product(Box::new(Family::Symmetric(3)), Box::new(Family::Cyclic(5)));
        let c = schur_cover(&f).unwrap();
        assert_eq!(c.base.order(), 30);
        assert_eq!(c.cover.order(), 30);
        assert!(c.multiplier.is_trivial());
    }
}
