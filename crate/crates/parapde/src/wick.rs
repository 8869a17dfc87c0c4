//! Symbolic Wick/Hermite algebra over abstract Gaussian coordinates, the
//! Isserlis pairing oracle, and the binary-tree bookkeeping used by the
//! Burgers expansion.
//!
//! Wick monomials here are the orthogonalized Hermite monomials
//! `:Z_{i_1} .. Z_{i_n}:` with respect to a supplied covariance table, so
//! that `E[:Z_{a_1}..Z_{a_n}: :Z_{b_1}..Z_{b_n}:]` is the permanent of the
//! cross-covariance matrix. All identities are pinned against the Isserlis
//! oracle rather than against any particular prefactor convention.

use crate::spectral::SpectralField;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

/// Largest total degree the pairing oracle will expand (105 pairings).
pub const ISSERLIS_DEGREE_CAP: usize = 8;

/// A scalar multiple of one Wick monomial `:Z_{i_1} .. Z_{i_n}:`;
/// arguments are kept sorted, which is the canonical symmetric form.
#[derive(Debug, Clone, PartialEq)]
pub struct WickMonomial {
    pub coefficient: f64,
    pub arguments: Vec<usize>,
}

impl WickMonomial {
    pub fn new(coefficient: f64, mut arguments: Vec<usize>) -> Self {
        arguments.sort_unstable();
        Self {
            coefficient,
            arguments,
        }
    }

    pub fn degree(&self) -> usize {
        self.arguments.len()
    }
}

/// Ordinary polynomial in jointly Gaussian coordinates: a sum of
/// `coeff * prod_i Z_{m_i}` terms with sorted monomials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianPolynomial {
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl GaussianPolynomial {
    pub fn monomial(coeff: f64, mut vars: Vec<usize>) -> Self {
        vars.sort_unstable();
        Self {
            terms: vec![(coeff, vars)],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out.collect()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|(c, m)| (a * c, m.clone())).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for (ca, ma) in &self.terms {
            for (cb, mb) in &other.terms {
                let mut m = ma.clone();
                m.extend(mb.iter().copied());
                m.sort_unstable();
                terms.push((ca * cb, m));
            }
        }
        Self { terms }.collect()
    }

    /// Merge identical monomials and drop zeros.
    pub fn collect(&self) -> Self {
        let mut map: HashMap<Vec<usize>, f64> = HashMap::new();
        for (c, m) in &self.terms {
            *map.entry(m.clone()).or_insert(0.0) += c;
        }
        let mut terms: Vec<(f64, Vec<usize>)> = map
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(m, c)| (c, m))
            .collect();
        terms.sort_by(|a, b| a.1.cmp(&b.1));
        Self { terms }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|(_, m)| m.len()).max().unwrap_or(0)
    }
}

/// Sum over perfect pairings of `E[prod Z_{vars}]` (Wick / Isserlis).
fn pairing_sum(vars: &[usize], cov: &impl Fn(usize, usize) -> f64) -> f64 {
    if vars.is_empty() {
        return 1.0;
    }
    // Pair the first variable with each of the others and recurse.
    let mut total = 0.0;
    let first = vars[0];
    for i in 1..vars.len() {
        let mut rest = Vec::with_capacity(vars.len() - 2);
        rest.extend_from_slice(&vars[1..i]);
        rest.extend_from_slice(&vars[i + 1..]);
        total += cov(first, vars[i]) * pairing_sum(&rest, cov);
    }
    total
}

/// Exact expectation of a polynomial in jointly Gaussian coordinates by
/// summing over pair partitions. Odd monomials contribute zero; degrees
/// above [`ISSERLIS_DEGREE_CAP`] are an argument error.
pub fn isserlis_oracle(
    poly: &GaussianPolynomial,
    cov: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (c, m) in &poly.terms {
        if m.len() > ISSERLIS_DEGREE_CAP {
            return Err(Error::InvalidArgument(format!(
                "monomial degree {} exceeds the pairing-oracle cap {}",
                m.len(),
                ISSERLIS_DEGREE_CAP
            )));
        }
        if m.len() % 2 == 1 {
            continue;
        }
        total += c * pairing_sum(m, &cov);
    }
    Ok(total)
}

/// Expand `:Z_{args}:` into an ordinary polynomial via the recursion
/// `:Z A: = Z :A: - sum_{a in A} Cov(Z, a) :A \ a:`.
pub fn wick_to_polynomial(
    args: &[usize],
    cov: &impl Fn(usize, usize) -> f64,
) -> GaussianPolynomial {
    if args.is_empty() {
        return GaussianPolynomial::monomial(1.0, vec![]);
    }
    let head = args[0];
    let tail = &args[1..];
    let inner = wick_to_polynomial(tail, cov);
    let mut out = inner.multiply(&GaussianPolynomial::monomial(1.0, vec![head]));
    for (i, &a) in tail.iter().enumerate() {
        let mut rest = tail.to_vec();
        rest.remove(i);
        let sub = wick_to_polynomial(&rest, cov);
        out = out.add(&sub.scale(-cov(head, a)));
    }
    out.collect()
}

/// Coefficient table of the product `H_m H_n`: entries `(p, q, l, c)` with
/// `p + l = m`, `q + l = n` and `c = m! n! / (p! q! l!)`, meaning
///
/// `:Z^m: :W^n: = sum c * Cov(Z, W)^l :Z^p W^q:`.
pub fn wick_product_expand(m: usize, n: usize) -> Vec<(usize, usize, usize, u128)> {
    let fact = |k: usize| -> u128 { (1..=k as u128).product::<u128>().max(1) };
    let mut out = Vec::new();
    for l in 0..=m.min(n) {
        let p = m - l;
        let q = n - l;
        let c = fact(m) * fact(n) / (fact(p) * fact(q) * fact(l));
        out.push((p, q, l, c));
    }
    out
}

/// `E[:Z_{a_1}..Z_{a_n}: :Z_{b_1}..Z_{b_n}:]`: the permanent of the
/// cross-covariance matrix; zero when the degrees differ, one when both
/// monomials are empty.
pub fn wick_expectation(
    a: &[usize],
    b: &[usize],
    cov: impl Fn(usize, usize) -> f64,
) -> f64 {
    if a.len() != b.len() {
        return 0.0;
    }
    let n = a.len();
    let gram: Vec<Vec<f64>> = a
        .iter()
        .map(|&i| b.iter().map(|&j| cov(i, j)).collect())
        .collect();
    permanent(&gram, n)
}

fn permanent(g: &[Vec<f64>], n: usize) -> f64 {
    // Expansion over the first row with column masking; n <= 8 in practice.
    fn rec(g: &[Vec<f64>], row: usize, used: u32, n: usize) -> f64 {
        if row == n {
            return 1.0;
        }
        let mut acc = 0.0;
        for col in 0..n {
            if used & (1 << col) == 0 {
                acc += g[row][col] * rec(g, row + 1, used | (1 << col), n);
            }
        }
        acc
    }
    rec(g, 0, 0, n)
}

// ---------------------------------------------------------------------------
// Binary trees for the Burgers expansion
// ---------------------------------------------------------------------------

/// Unordered rooted binary tree; `Node` children are kept in canonical
/// (sorted) order so each isomorphism class has a unique representative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryTree {
    Leaf,
    Node(Box<BinaryTree>, Box<BinaryTree>),
}

impl BinaryTree {
    /// Canonicalizing constructor: the smaller child goes left.
    pub fn node(a: BinaryTree, b: BinaryTree) -> BinaryTree {
        if a <= b {
            BinaryTree::Node(Box::new(a), Box::new(b))
        } else {
            BinaryTree::Node(Box::new(b), Box::new(a))
        }
    }

    /// `d(leaf) = 0`, `d((t1 t2)) = 1 + d(t1) + d(t2)`.
    pub fn degree(&self) -> usize {
        match self {
            BinaryTree::Leaf => 0,
            BinaryTree::Node(a, b) => 1 + a.degree() + b.degree(),
        }
    }

    /// Serialized shape, e.g. `(((..).)(..))` with `.` for a leaf.
    pub fn shape_string(&self) -> String {
        match self {
            BinaryTree::Leaf => ".".into(),
            BinaryTree::Node(a, b) => format!("({}{})", a.shape_string(), b.shape_string()),
        }
    }
}

/// One isomorphism class with its planar multiplicity.
#[derive(Debug, Clone, Serialize)]
pub struct TreeClass {
    #[serde(serialize_with = "serialize_shape")]
    pub tree: BinaryTree,
    pub degree: usize,
    pub count: u128,
}

fn serialize_shape<S: serde::Serializer>(t: &BinaryTree, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.shape_string())
}

/// Enumerate all classes of degree `<= max_degree` together with the planar
/// counts `c(tau) = sum over ordered pairs (t1, t2) with (t1 t2) = tau of
/// c(t1) c(t2)`.
pub fn enumerate_trees(max_degree: usize) -> Result<Vec<TreeClass>> {
    if max_degree > 12 {
        return Err(Error::InvalidArgument(format!(
            "tree degree {max_degree} exceeds the enumeration cap 12"
        )));
    }
    // by_degree[d]: canonical tree -> planar count
    let mut by_degree: Vec<Vec<(BinaryTree, u128)>> = vec![vec![(BinaryTree::Leaf, 1)]];
    for d in 1..=max_degree {
        let mut classes: HashMap<BinaryTree, u128> = HashMap::new();
        for d1 in 0..d {
            let d2 = d - 1 - d1;
            for (t1, c1) in by_degree[d1].clone() {
                for (t2, c2) in &by_degree[d2] {
                    let t = BinaryTree::node(t1.clone(), t2.clone());
                    *classes.entry(t).or_insert(0) += c1 * c2;
                }
            }
        }
        let mut v: Vec<(BinaryTree, u128)> = classes.into_iter().collect();
        v.sort();
        by_degree.push(v);
    }
    let mut out = Vec::new();
    for (d, classes) in by_degree.iter().enumerate() {
        for (tree, count) in classes {
            out.push(TreeClass {
                tree: tree.clone(),
                degree: d,
                count: *count,
            });
        }
    }
    Ok(out)
}

/// Duhamel convolution `B(f, g(t)) = J d/dx (f g)` evaluated on a uniform
/// time grid via exponential-integrator steps with the source frozen on the
/// left endpoint; exact for time-constant sources.
pub fn b_path(f: &[SpectralField], g: &[SpectralField], dt: f64) -> Result<Vec<SpectralField>> {
    if f.len() != g.len() || f.is_empty() {
        return Err(Error::InvalidArgument(
            "b_path requires two equal-length nonempty paths".into(),
        ));
    }
    let grid = f[0].grid();
    let mut out = Vec::with_capacity(f.len());
    out.push(SpectralField::zeros(grid));
    for i in 0..f.len() - 1 {
        let source = f[i].dealiased_product(&g[i])?.derivative(0)?;
        let next = SpectralField::duhamel_step(&out[i], &source, dt)?;
        out.push(next);
    }
    Ok(out)
}

/// Recursive tree evaluation `X^leaf = X`, `X^{(t1 t2)} = B(X^{t1}, X^{t2})`
/// over a uniform time grid, memoized per canonical subtree.
pub fn tree_term(
    tau: &BinaryTree,
    x_path: &[SpectralField],
    dt: f64,
) -> Result<Vec<SpectralField>> {
    let mut memo: HashMap<BinaryTree, Vec<SpectralField>> = HashMap::new();
    tree_term_memo(tau, x_path, dt, &mut memo)
}

fn tree_term_memo(
    tau: &BinaryTree,
    x_path: &[SpectralField],
    dt: f64,
    memo: &mut HashMap<BinaryTree, Vec<SpectralField>>,
) -> Result<Vec<SpectralField>> {
    if let Some(hit) = memo.get(tau) {
        return Ok(hit.clone());
    }
    let path = match tau {
        BinaryTree::Leaf => x_path.to_vec(),
        BinaryTree::Node(a, b) => {
            let pa = tree_term_memo(a, x_path, dt, memo)?;
            let pb = tree_term_memo(b, x_path, dt, memo)?;
            b_path(&pa, &pb, dt)?
        }
    };
    memo.insert(tau.clone(), path.clone());
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_expansion_coefficient_tables() {
        assert_eq!(wick_product_expand(1, 1), vec![(1, 1, 0, 1), (0, 0, 1, 1)]);
        assert_eq!(wick_product_expand(2, 1), vec![(2, 1, 0, 1), (1, 0, 1, 2)]);
        // m = 0 is the unit of the algebra.
        assert_eq!(wick_product_expand(0, 3), vec![(0, 3, 0, 1)]);
        // All l <= min(m, n) appear with positive integer coefficients.
        let table = wick_product_expand(3, 4);
        assert_eq!(table.len(), 4);
        assert!(table.iter().all(|&(_, _, _, c)| c > 0));
    }

    #[test]
    fn wick_expectation_is_the_gram_permanent() {
        let orthonormal = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        // n = 0: empty product has expectation 1.
        assert_eq!(wick_expectation(&[], &[], orthonormal), 1.0);
        // n = 1, orthonormal.
        assert_eq!(wick_expectation(&[0], &[0], orthonormal), 1.0);
        // n = 2 distinct orthonormal: identity permutation only.
        assert_eq!(wick_expectation(&[0, 1], &[0, 1], orthonormal), 1.0);
        // n = 2 repeated argument: permanent of the all-ones matrix.
        assert_eq!(wick_expectation(&[0, 0], &[0, 0], orthonormal), 2.0);
        // Degree mismatch vanishes.
        assert_eq!(wick_expectation(&[0], &[0, 1], orthonormal), 0.0);
        // A vector orthogonal to everything kills the permanent.
        let cov = |i: usize, j: usize| {
            if i == 9 || j == 9 {
                0.0
            } else {
                orthonormal(i, j)
            }
        };
        assert_eq!(wick_expectation(&[0, 9], &[0, 9], cov), 0.0);
    }

    #[test]
    fn isserlis_textbook_values() {
        let std_cov = |_: usize, _: usize| 1.0;
        // E[Z^4] = 3 for a standard scalar Gaussian.
        let z4 = GaussianPolynomial::monomial(1.0, vec![0, 0, 0, 0]);
        assert_eq!(isserlis_oracle(&z4, std_cov).unwrap(), 3.0);
        // Odd degree integrates to zero (returned, not an error).
        let z3 = GaussianPolynomial::monomial(1.0, vec![0, 0, 0]);
        assert_eq!(isserlis_oracle(&z3, std_cov).unwrap(), 0.0);
        // E[Z1 Z2 Z3 Z4]: the three pairings.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..4).map(|_| 0.25 * rng.gen_range(-4i32..=4) as f64).collect())
            .collect();
        let sym = |i: usize, j: usize| {
            if i <= j {
                c[i][j]
            } else {
                c[j][i]
            }
        };
        let p = GaussianPolynomial::monomial(1.0, vec![0, 1, 2, 3]);
        let expect = sym(0, 1) * sym(2, 3) + sym(0, 2) * sym(1, 3) + sym(0, 3) * sym(1, 2);
        assert!((isserlis_oracle(&p, sym).unwrap() - expect).abs() < 1e-12);
        // Degree cap.
        let z10 = GaussianPolynomial::monomial(1.0, vec![0; 10]);
        assert!(isserlis_oracle(&z10, std_cov).is_err());
    }

    #[test]
    fn wick_squared_expectation_agrees_with_oracle() {
        // E[:Z^2:^2] via the permanent equals the Isserlis value of the
        // expanded polynomial, for a non-unit variance.
        let v = 0.75;
        let cov = move |_: usize, _: usize| v;
        let perm = wick_expectation(&[0, 0], &[0, 0], cov);
        let poly = wick_to_polynomial(&[0, 0], &cov);
        let sq = poly.multiply(&poly);
        let oracle = isserlis_oracle(&sq, cov).unwrap();
        assert!((perm - oracle).abs() < 1e-12, "{perm} vs {oracle}");
        assert!((perm - 2.0 * v * v).abs() < 1e-12);
    }

    #[test]
    fn product_expansion_identity_against_the_oracle() {
        // For every m + n <= 6 and random dyadic-rational Gram tables the
        // symbolic expansion of :Z^m: :W^n: reproduces the product as an
        // ordinary polynomial, term by term.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 0..=6usize {
            for n in 0..=(6 - m) {
                let czz = 0.25 * rng.gen_range(1i32..=8) as f64;
                let cww = 0.25 * rng.gen_range(1i32..=8) as f64;
                let czw = 0.125 * rng.gen_range(-8i32..=8) as f64;
                let cov = move |i: usize, j: usize| match (i, j) {
                    (0, 0) => czz,
                    (1, 1) => cww,
                    _ => czw,
                };
                let lhs = wick_to_polynomial(&vec![0; m], &cov)
                    .multiply(&wick_to_polynomial(&vec![1; n], &cov));
                let mut rhs = GaussianPolynomial::default();
                for (p, q, l, c) in wick_product_expand(m, n) {
                    let mut args = vec![0; p];
                    args.extend(vec![1; q]);
                    let wick = wick_to_polynomial(&args, &cov);
                    rhs = rhs.add(&wick.scale(c as f64 * czw.powi(l as i32)));
                }
                let diff = lhs.add(&rhs.scale(-1.0)).collect();
                let worst = diff
                    .terms
                    .iter()
                    .map(|(c, _)| c.abs())
                    .fold(0.0, f64::max);
                assert!(
                    worst < 1e-9,
                    "H_{m} H_{n} expansion defect {worst} (czz {czz}, cww {cww}, czw {czw})"
                );
                // Cross-check the plain expectation through the oracle when
                // the total degree admits pairing expansion.
                if m + n <= ISSERLIS_DEGREE_CAP {
                    let direct = isserlis_oracle(&lhs, cov).unwrap();
                    let fact: u128 = (1..=m as u128).product::<u128>().max(1);
                    let expect = if m == n {
                        fact as f64 * czw.powi(m as i32)
                    } else {
                        0.0
                    };
                    assert!((direct - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tree_enumeration_counts() {
        let classes = enumerate_trees(3).unwrap();
        let by_degree = |d: usize| -> Vec<u128> {
            let mut v: Vec<u128> = classes
                .iter()
                .filter(|c| c.degree == d)
                .map(|c| c.count)
                .collect();
            v.sort();
            v
        };
        assert_eq!(by_degree(0), vec![1]); // leaf
        assert_eq!(by_degree(1), vec![1]); // cherry
        assert_eq!(by_degree(2), vec![2]); // degree-2 chain
        assert_eq!(by_degree(3), vec![1, 4]); // balanced + chain
        // Isomorphism class counts per degree.
        assert_eq!(by_degree(0).len(), 1);
        assert_eq!(by_degree(1).len(), 1);
        assert_eq!(by_degree(2).len(), 1);
        assert_eq!(by_degree(3).len(), 2);
        assert!(enumerate_trees(13).is_err());
    }

    #[test]
    fn planar_counts_sum_to_catalan_numbers() {
        let classes = enumerate_trees(12).unwrap();
        let catalan = |n: u128| -> u128 {
            // C_n = (2n)! / (n! (n+1)!)
            let f = |k: u128| (1..=k).product::<u128>().max(1);
            f(2 * n) / (f(n) * f(n + 1))
        };
        for d in 0..=12u128 {
            let total: u128 = classes
                .iter()
                .filter(|c| c.degree == d as usize)
                .map(|c| c.count)
                .sum();
            assert_eq!(total, catalan(d), "degree {d}");
        }
    }

    #[test]
    fn tree_term_leaf_zero_and_cherry_closed_form() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let a = 0.6;
        let x = SpectralField::mode_pair(grid, &[1], Complex64::new(a, 0.0));
        let steps = 8usize;
        let dt = 0.05;
        let path: Vec<SpectralField> = vec![x.clone(); steps + 1];
        // Leaf evaluates to the path itself.
        let leaf = tree_term(&BinaryTree::Leaf, &path, dt).unwrap();
        assert_eq!(leaf[steps], x);
        // Zero path stays zero for any tree.
        let zero_path = vec![SpectralField::zeros(grid); steps + 1];
        let chain = BinaryTree::node(
            BinaryTree::node(BinaryTree::Leaf, BinaryTree::Leaf),
            BinaryTree::Leaf,
        );
        let z = tree_term(&chain, &zero_path, dt).unwrap();
        assert!(z[steps].max_abs() == 0.0);
        // Cherry with a constant-in-time mode pair: per-mode closed form
        // B(X,X)(t, k) = (1 - e^{-k^2 t}) / k^2 * [d/dx X^2](k).
        let cherry = BinaryTree::node(BinaryTree::Leaf, BinaryTree::Leaf);
        let b = tree_term(&cherry, &path, dt).unwrap();
        let t = steps as f64 * dt;
        let source = x.dealiased_product(&x).unwrap().derivative(0).unwrap();
        let expect2 = source.coeff(&[2]) * (1.0 - (-4.0 * t).exp()) / 4.0;
        assert!((b[steps].coeff(&[2]) - expect2).norm() < 1e-13);
        let expect0 = source.coeff(&[0]); // zero: derivative kills the mean
        assert!(expect0.norm() < 1e-14 && b[steps].coeff(&[0]).norm() < 1e-14);
        // Bilinearity at the cherry level.
        let path2: Vec<SpectralField> = path.iter().map(|f| f.scale(2.0)).collect();
        let b2 = b_path(&path2, &path, dt).unwrap();
        let b1 = b_path(&path, &path, dt).unwrap();
        assert!((&b2[steps] - &b1[steps].scale(2.0)).max_abs() < 1e-12);
    }
}
