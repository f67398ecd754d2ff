//! Finite groups as validated Cayley tables.
//!
//! Elements are dense indices `0..order`, with the identity remapped to
//! index 0 at construction. All arithmetic is constant-time table lookup.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::{Error, Result};

/// Largest order accepted by the built-in constructors.
pub const MAX_BUILTIN_ORDER: usize = 5040;
/// Largest order accepted for table files (validated exhaustively).
pub const MAX_TABLE_ORDER: usize = 512;
/// Orders up to this bound get an exhaustive associativity check.
const ASSOC_CHECK_ORDER: usize = 512;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<usize>, // row-major order x order
    inverses: Vec<usize>,
    name: String,
    fingerprint: u64,
}

impl FiniteGroup {
    /// Builds and validates a group from a square Cayley table. The identity
    /// is located and remapped to index 0 if necessary.
    pub fn from_cayley(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::GroupValidation("empty table".into()));
        }
        let mut cayley = Vec::with_capacity(order * order);
        for row in &table {
            if row.len() != order {
                return Err(Error::GroupValidation("table is not square".into()));
            }
            for &v in row {
                if v >= order {
                    return Err(Error::GroupValidation(format!(
                        "entry {v} out of range for order {order}"
                    )));
                }
                cayley.push(v);
            }
        }
        // locate the two-sided identity
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| cayley[e * order + a] == a && cayley[a * order + e] == a))
            .ok_or_else(|| Error::GroupValidation("no identity element".into()))?;
        if identity != 0 {
            // relabel by swapping 0 <-> identity
            let relabel = |x: usize| {
                if x == identity {
                    0
                } else if x == 0 {
                    identity
                } else {
                    x
                }
            };
            let mut remapped = vec![0usize; order * order];
            for a in 0..order {
                for b in 0..order {
                    remapped[relabel(a) * order + relabel(b)] =
                        relabel(cayley[a * order + b]);
                }
            }
            cayley = remapped;
        }
        let mut inverses = vec![usize::MAX; order];
        for a in 0..order {
            match (0..order).find(|&b| cayley[a * order + b] == 0) {
                Some(b) => {
                    if cayley[b * order + a] != 0 {
                        return Err(Error::GroupValidation(format!(
                            "element {a} has no two-sided inverse"
                        )));
                    }
                    inverses[a] = b;
                }
                None => {
                    return Err(Error::GroupValidation(format!("element {a} has no inverse")))
                }
            }
        }
        let fingerprint = fingerprint_table(order, &cayley);
        let g = FiniteGroup { order, cayley, inverses, name: name.into(), fingerprint };
        if order <= ASSOC_CHECK_ORDER {
            g.check_associativity()?;
        }
        Ok(g)
    }

    fn check_associativity(&self) -> Result<()> {
        let o = self.order;
        for a in 0..o {
            for b in 0..o {
                let ab = self.mul(a, b);
                for c in 0..o {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(Error::GroupValidation(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Identity index; always 0 by construction.
    pub fn identity(&self) -> usize {
        0
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Hash of the multiplication table; used to detect group mismatches
    /// between objects without comparing whole tables.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Smallest k >= 1 with a^k = e.
    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// All quadruples (x, y, z, w) with x·y⁻¹·z·w⁻¹ = e; w is determined by
    /// the first three, so exactly order³ items are produced.
    pub fn quadruples(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let o = self.order;
        (0..o).flat_map(move |x| {
            (0..o).flat_map(move |y| {
                let xy_inv = self.mul(x, self.inv(y));
                (0..o).map(move |z| (x, y, z, self.mul(xy_inv, z)))
            })
        })
    }
}

fn fingerprint_table(order: usize, cayley: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    mix(order as u64);
    for &v in cayley {
        mix(v as u64);
    }
    h
}

/// A named constructor for a group, parsed from the spec grammar
/// `cyclic:<n>`, `dihedral:<n>`, `symmetric:<n>`, `quaternion`,
/// `product(<spec>,<spec>)`, `table:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    Quaternion,
    Product(Box<GroupSpec>, Box<GroupSpec>),
    TableFile(PathBuf),
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupSpec::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupSpec::Symmetric(n) => write!(f, "symmetric:{n}"),
            GroupSpec::Quaternion => write!(f, "quaternion"),
            GroupSpec::Product(a, b) => write!(f, "product({a},{b})"),
            GroupSpec::TableFile(p) => write!(f, "table:{}", p.display()),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "quaternion" {
            return Ok(GroupSpec::Quaternion);
        }
        if let Some(rest) = s.strip_prefix("cyclic:") {
            return Ok(GroupSpec::Cyclic(parse_count(rest, "cyclic")?));
        }
        if let Some(rest) = s.strip_prefix("dihedral:") {
            return Ok(GroupSpec::Dihedral(parse_count(rest, "dihedral")?));
        }
        if let Some(rest) = s.strip_prefix("symmetric:") {
            return Ok(GroupSpec::Symmetric(parse_count(rest, "symmetric")?));
        }
        if let Some(rest) = s.strip_prefix("table:") {
            if rest.is_empty() {
                return Err(Error::InvalidSpec("table: needs a path".into()));
            }
            return Ok(GroupSpec::TableFile(PathBuf::from(rest)));
        }
        if let Some(rest) = s.strip_prefix("product(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::InvalidSpec(format!("unbalanced parens in {s:?}")))?;
            let split = split_top_level(inner)
                .ok_or_else(|| Error::InvalidSpec(format!("product needs two specs: {s:?}")))?;
            let a = GroupSpec::from_str(split.0)?;
            let b = GroupSpec::from_str(split.1)?;
            return Ok(GroupSpec::Product(Box::new(a), Box::new(b)));
        }
        Err(Error::InvalidSpec(format!("unrecognized spec {s:?}")))
    }
}

fn parse_count(s: &str, ctor: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidSpec(format!("{ctor}: expected an integer, got {s:?}")))
}

/// Splits `a,b` at the top-level comma, respecting nested parens.
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// Builds a validated group from a spec.
pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    let g = match spec {
        GroupSpec::Cyclic(n) => build_cyclic(*n)?,
        GroupSpec::Dihedral(n) => build_dihedral(*n)?,
        GroupSpec::Symmetric(n) => build_symmetric(*n)?,
        GroupSpec::Quaternion => build_quaternion()?,
        GroupSpec::Product(a, b) => {
            let ga = build_group(a)?;
            let gb = build_group(b)?;
            build_product(&ga, &gb, spec.to_string())?
        }
        GroupSpec::TableFile(path) => load_table_file(path)?,
    };
    if g.order() > MAX_BUILTIN_ORDER {
        return Err(Error::InvalidSpec(format!(
            "order {} exceeds cap {MAX_BUILTIN_ORDER}",
            g.order()
        )));
    }
    Ok(g)
}

/// Convenience wrapper: parse a spec string and build the group behind an Arc.
pub fn build_group_str(spec: &str) -> Result<Arc<FiniteGroup>> {
    Ok(Arc::new(build_group(&spec.parse()?)?))
}

fn build_cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 || n > MAX_BUILTIN_ORDER {
        return Err(Error::InvalidSpec(format!("cyclic order {n} out of range 1..={MAX_BUILTIN_ORDER}")));
    }
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroup::from_cayley(format!("cyclic:{n}"), table)
}

fn build_dihedral(n: usize) -> Result<FiniteGroup> {
    if n == 0 || 2 * n > MAX_BUILTIN_ORDER {
        return Err(Error::InvalidSpec(format!("dihedral parameter {n} out of range")));
    }
    // index = j*n + i for the word r^i s^j; r^i s^j · r^k s^l = r^{i + (-1)^j k} s^{j+l}
    let idx = |i: usize, j: usize| j * n + i;
    let mut table = vec![vec![0usize; 2 * n]; 2 * n];
    for j1 in 0..2 {
        for i1 in 0..n {
            for j2 in 0..2 {
                for i2 in 0..n {
                    let i = if j1 == 0 { (i1 + i2) % n } else { (i1 + n - i2 % n) % n };
                    let j = (j1 + j2) % 2;
                    table[idx(i1, j1)][idx(i2, j2)] = idx(i, j);
                }
            }
        }
    }
    FiniteGroup::from_cayley(format!("dihedral:{n}"), table)
}

fn build_symmetric(n: usize) -> Result<FiniteGroup> {
    if n == 0 || n > 7 {
        return Err(Error::InvalidSpec(format!("symmetric degree {n} out of range 1..=7")));
    }
    let perms = permutations_lex(n);
    let order = perms.len();
    let index_of = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
    let mut table = vec![vec![0usize; order]; order];
    let mut composed = vec![0usize; n];
    for (a, pa) in perms.iter().enumerate() {
        for (b, pb) in perms.iter().enumerate() {
            for (i, slot) in composed.iter_mut().enumerate() {
                *slot = pa[pb[i]];
            }
            table[a][b] = index_of(&composed);
        }
    }
    FiniteGroup::from_cayley(format!("symmetric:{n}"), table)
}

fn permutations_lex(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

fn build_quaternion() -> Result<FiniteGroup> {
    // elements: sign*unit with units 1,i,j,k; index = unit + 4*sign_bit
    let unit_mul = |a: usize, b: usize| -> (usize, usize) {
        // returns (sign_bit, unit) for unit_a * unit_b
        const TBL: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        TBL[a][b]
    };
    let mut table = vec![vec![0usize; 8]; 8];
    for (a, row) in table.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let (ua, sa) = (a % 4, a / 4);
            let (ub, sb) = (b % 4, b / 4);
            let (sm, um) = unit_mul(ua, ub);
            *cell = um + 4 * ((sa + sb + sm) % 2);
        }
    }
    FiniteGroup::from_cayley("quaternion", table)
}

fn build_product(ga: &FiniteGroup, gb: &FiniteGroup, name: String) -> Result<FiniteGroup> {
    let (oa, ob) = (ga.order(), gb.order());
    let order = oa * ob;
    if order > MAX_BUILTIN_ORDER {
        return Err(Error::InvalidSpec(format!("product order {order} exceeds cap")));
    }
    let idx = |a: usize, b: usize| a * ob + b;
    let mut table = vec![vec![0usize; order]; order];
    for a1 in 0..oa {
        for b1 in 0..ob {
            for a2 in 0..oa {
                for b2 in 0..ob {
                    table[idx(a1, b1)][idx(a2, b2)] = idx(ga.mul(a1, a2), gb.mul(b1, b2));
                }
            }
        }
    }
    FiniteGroup::from_cayley(name, table)
}

/// Reads a Cayley table file: first line the order, then `order` lines of
/// `order` space-separated element indices.
pub fn load_table_file(path: &Path) -> Result<FiniteGroup> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let order: usize = lines
        .next()
        .ok_or_else(|| Error::InvalidSpec("empty table file".into()))?
        .trim()
        .parse()
        .map_err(|_| Error::InvalidSpec("first line must be the order".into()))?;
    if order == 0 || order > MAX_TABLE_ORDER {
        return Err(Error::InvalidSpec(format!(
            "table order {order} out of range 1..={MAX_TABLE_ORDER}"
        )));
    }
    let mut table = Vec::with_capacity(order);
    for _ in 0..order {
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidSpec(format!("expected {order} table rows")))?;
        let row: Vec<usize> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidSpec(format!("bad table entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != order {
            return Err(Error::InvalidSpec(format!(
                "row has {} entries, expected {order}",
                row.len()
            )));
        }
        table.push(row);
    }
    FiniteGroup::from_cayley(format!("table:{}", path.display()), table)
}
