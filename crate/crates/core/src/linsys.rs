//! The exact integer linear system linking column multiplicities to
//! per-subset black counts.
//!
//! A pixel's encoding is a multiset of columns; `x_T` counts the columns
//! that are black exactly on the transparencies in `T`. Stacking the
//! transparencies in `S` shows `r_S = Σ_{T ∩ S ≠ ∅} x_T` black subpixels,
//! i.e. `M x = r` with `m_{S,T} = 1` iff `S ∩ T ≠ ∅`. `M` is invertible
//! over the integers, so `r` determines `x` uniquely; [`solve_x`] evaluates
//! the closed form directly in `O(4^n)` additions without materializing a
//! matrix. [`build_m`] and [`inverse_m`] exist as test oracles.

use crate::error::{Error, Result};
use crate::lattice::{check_ground_size, full_mask, submasks, SubsetId};
use crate::scalar::{Count, CountScalar};

/// Per-subset black count targets: `r_S` for every nonempty `S`.
/// `r_∅` is 0 by convention and never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RVector<C: CountScalar = Count> {
    n: u8,
    values: Vec<C>, // index = mask - 1
}

impl<C: CountScalar> RVector<C> {
    /// Builds from a value per nonempty subset, in ascending mask order.
    pub fn from_values(n: u8, values: Vec<C>) -> Result<Self> {
        check_ground_size(n)?;
        let dim = (1usize << n) - 1;
        if values.len() != dim {
            return Err(Error::Format {
                what: "r-vector",
                detail: format!("expected {dim} entries, got {}", values.len()),
            });
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(Error::NegativeValue {
                what: "black count".into(),
                value: v.to_i64().unwrap_or(-1),
            });
        }
        Ok(RVector { n, values })
    }

    pub fn from_fn(n: u8, mut f: impl FnMut(SubsetId) -> C) -> Result<Self> {
        check_ground_size(n)?;
        let values = (1..1u32 << n)
            .map(|mask| f(SubsetId::new(mask, n).expect("mask in range")))
            .collect();
        Self::from_values(n, values)
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    /// `r_S`; the empty set yields 0.
    #[inline]
    pub fn get(&self, s: SubsetId) -> C {
        debug_assert_eq!(s.ground_size(), self.n);
        if s.is_empty() {
            C::zero()
        } else {
            self.values[(s.mask() - 1) as usize]
        }
    }

    #[inline]
    pub(crate) fn get_mask(&self, mask: u16) -> C {
        if mask == 0 {
            C::zero()
        } else {
            self.values[(mask - 1) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, C)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| {
            (
                SubsetId::new(i as u32 + 1, self.n).expect("mask in range"),
                v,
            )
        })
    }
}

/// Column multiplicities of one basis matrix: `counts[T]` columns are black
/// exactly on the transparencies in `T`. The empty set indexes all-white
/// padding columns. [`solve_x`] may return negative entries; feasibility is
/// a separate check and every builder rejects negative profiles before use.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PixelProfile<C: CountScalar = Count> {
    n: u8,
    counts: Vec<C>, // index = mask, length 2^n
}

impl<C: CountScalar> PixelProfile<C> {
    pub fn zero(n: u8) -> Result<Self> {
        check_ground_size(n)?;
        Ok(PixelProfile {
            n,
            counts: vec![C::zero(); 1usize << n],
        })
    }

    pub fn from_counts(n: u8, counts: Vec<C>) -> Result<Self> {
        check_ground_size(n)?;
        if counts.len() != 1usize << n {
            return Err(Error::Format {
                what: "pixel profile",
                detail: format!("expected {} entries, got {}", 1usize << n, counts.len()),
            });
        }
        Ok(PixelProfile { n, counts })
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    #[inline]
    pub fn get(&self, t: SubsetId) -> C {
        debug_assert_eq!(t.ground_size(), self.n);
        self.counts[t.mask() as usize]
    }

    #[inline]
    pub(crate) fn get_mask(&self, mask: u16) -> C {
        self.counts[mask as usize]
    }

    #[inline]
    pub fn set(&mut self, t: SubsetId, value: C) {
        debug_assert_eq!(t.ground_size(), self.n);
        self.counts[t.mask() as usize] = value;
    }

    pub fn add(&mut self, t: SubsetId, delta: C) {
        debug_assert_eq!(t.ground_size(), self.n);
        let i = t.mask() as usize;
        self.counts[i] = self.counts[i] + delta;
    }

    /// Total column count, padding included.
    pub fn total(&self) -> C {
        self.counts
            .iter()
            .fold(C::zero(), |acc, &v| acc + v)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.counts.iter().all(|v| !v.is_negative())
    }

    /// Subsets with negative multiplicity, ascending by mask.
    pub fn negative_supports(&self) -> Vec<SubsetId> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_negative())
            .map(|(mask, _)| SubsetId::new(mask as u32, self.n).expect("mask in range"))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, C)> + '_ {
        self.counts.iter().enumerate().map(move |(mask, &v)| {
            (
                SubsetId::new(mask as u32, self.n).expect("mask in range"),
                v,
            )
        })
    }

    /// Nonzero entries, ascending by mask.
    pub fn nonzero(&self) -> impl Iterator<Item = (SubsetId, C)> + '_ {
        self.iter().filter(|(_, v)| !v.is_zero())
    }
}

/// Dense square matrix over the nonempty-subset basis in canonical order;
/// holds the inclusion matrix `M_n` or its inverse. Only used by tests and
/// oracles, so the ground set is capped at 10.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InclusionMatrix<C: CountScalar = Count> {
    n: u8,
    dim: usize,
    data: Vec<C>,
}

impl<C: CountScalar> InclusionMatrix<C> {
    fn zeroed(n: u8) -> Self {
        let dim = (1usize << n) - 1;
        InclusionMatrix {
            n,
            dim,
            data: vec![C::zero(); dim * dim],
        }
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry by row/column position in canonical order (row `i` is the
    /// subset with mask `i+1`).
    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> C {
        self.data[row * self.dim + col]
    }

    #[inline]
    fn set_entry(&mut self, row: usize, col: usize, v: C) {
        self.data[row * self.dim + col] = v;
    }

    pub fn multiply(&self, rhs: &InclusionMatrix<C>) -> InclusionMatrix<C> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = InclusionMatrix::zeroed(self.n);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.dim {
                    let v = out.entry(i, j) + a * rhs.entry(k, j);
                    out.set_entry(i, j, v);
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let e = self.entry(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// Applies the matrix to a vector indexed like the canonical order.
    pub fn apply(&self, v: &[C]) -> Vec<C> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(C::zero(), |acc, j| acc + self.entry(i, j) * v[j])
            })
            .collect()
    }
}

const MAX_DENSE_GROUND: u8 = 10;

fn check_dense_ground(n: u8) -> Result<()> {
    check_ground_size(n)?;
    if n > MAX_DENSE_GROUND {
        return Err(Error::Tractability {
            detail: format!("dense subset matrices are limited to n <= {MAX_DENSE_GROUND}, got {n}"),
        });
    }
    Ok(())
}

/// The inclusion matrix `M_n`: entry 1 iff the row and column subsets meet.
pub fn build_m<C: CountScalar>(n: u8) -> Result<InclusionMatrix<C>> {
    check_dense_ground(n)?;
    let mut m = InclusionMatrix::zeroed(n);
    for row in 0..m.dim {
        let s = (row + 1) as u16;
        for col in 0..m.dim {
            let t = (col + 1) as u16;
            if s & t != 0 {
                m.set_entry(row, col, C::one());
            }
        }
    }
    Ok(m)
}

/// `M_n^{-1}`, built by the block recursion with `M_1^{-1} = (1)`. Every
/// entry is -1, 0 or 1.
pub fn inverse_m<C: CountScalar>(n: u8) -> Result<InclusionMatrix<C>> {
    check_dense_ground(n)?;
    let mut inv = InclusionMatrix::zeroed(1);
    inv.set_entry(0, 0, C::one());
    for k in 1..n {
        inv = extend_inverse(&inv, k + 1);
    }
    Ok(inv)
}

/// One step of the inverse recursion: given `A = M_k^{-1}`, produces
/// `M_{k+1}^{-1}` as the block matrix
/// `[[0, -A e, A], [-e^t A, 0, e^t A], [A, A e, -A]]`.
fn extend_inverse<C: CountScalar>(a: &InclusionMatrix<C>, next_n: u8) -> InclusionMatrix<C> {
    let d = a.dim;
    let row_sums: Vec<C> = (0..d)
        .map(|i| (0..d).fold(C::zero(), |acc, j| acc + a.entry(i, j)))
        .collect();
    let col_sums: Vec<C> = (0..d)
        .map(|j| (0..d).fold(C::zero(), |acc, i| acc + a.entry(i, j)))
        .collect();

    let mut out = InclusionMatrix::zeroed(next_n);
    let mid = d; // index of the new singleton {next_n}
    for i in 0..d {
        for j in 0..d {
            let v = a.entry(i, j);
            out.set_entry(i, mid + 1 + j, v); // top-right: A
            out.set_entry(mid + 1 + i, j, v); // bottom-left: A
            out.set_entry(mid + 1 + i, mid + 1 + j, -v); // bottom-right: -A
        }
        out.set_entry(i, mid, -row_sums[i]); // top-middle: -A e
        out.set_entry(mid + 1 + i, mid, row_sums[i]); // bottom-middle: A e
        out.set_entry(mid, i, -col_sums[i]); // middle-left: -e^t A
        out.set_entry(mid, mid + 1 + i, col_sums[i]); // middle-right: e^t A
    }
    out
}

/// Closed-form unique solution of `M x = r`:
/// `x_S = Σ_{complement(S) ⊆ T} (-1)^(|T|+|S|+n+1) r_T` with `r_∅ = 0`.
/// The padding count `x_∅` is left at 0. Entries may be negative; use
/// [`check_nonnegative`] or [`PixelProfile::is_nonnegative`] to test
/// feasibility.
pub fn solve_x<C: CountScalar>(r: &RVector<C>) -> PixelProfile<C> {
    let n = r.ground_size();
    let full = full_mask(n);
    let mut profile = PixelProfile::zero(n).expect("valid ground size");
    for s_mask in 1..=full {
        let s_len = s_mask.count_ones();
        let comp = full & !s_mask;
        let mut acc = C::zero();
        for sub in submasks(s_mask) {
            let t = comp | sub;
            if t == 0 {
                continue; // r_∅ = 0
            }
            let positive = (t.count_ones() + s_len + n as u32 + 1) % 2 == 0;
            let v = r.get_mask(t);
            if positive {
                acc += v;
            } else {
                acc -= v;
            }
        }
        profile.counts[s_mask as usize] = acc;
    }
    profile
}

/// The non-negativity test on `r` directly: returns every `S ⊊ {1..n}`
/// (the empty set included) with `Σ_{S ⊆ T} (-1)^(|S|+|T|) r_T > 0`.
/// An empty result is equivalent to `solve_x(r)` being componentwise >= 0.
pub fn check_nonnegative<C: CountScalar>(r: &RVector<C>) -> Vec<SubsetId> {
    let n = r.ground_size();
    let full = full_mask(n);
    let mut violators = Vec::new();
    for s_mask in 0..full {
        let s_len = s_mask.count_ones();
        let free = full & !s_mask;
        let mut acc = C::zero();
        for sub in submasks(free) {
            let t = s_mask | sub;
            if t == 0 {
                continue;
            }
            if (s_len + t.count_ones()) % 2 == 0 {
                acc += r.get_mask(t);
            } else {
                acc -= r.get_mask(t);
            }
        }
        if acc > C::zero() {
            violators.push(SubsetId::new(s_mask as u32, n).expect("mask in range"));
        }
    }
    violators
}

/// Independent forward check: evaluates `M x` support-wise and compares to
/// `r`, ignoring the inert padding count `x_∅`.
pub fn verify_solution<C: CountScalar>(r: &RVector<C>, x: &PixelProfile<C>) -> bool {
    if r.ground_size() != x.ground_size() {
        return false;
    }
    let n = r.ground_size();
    let full = full_mask(n);
    for s_mask in 1..=full {
        let mut acc = C::zero();
        for t_mask in 1..=full {
            if s_mask & t_mask != 0 {
                acc += x.get_mask(t_mask);
            }
        }
        if acc != r.get_mask(s_mask) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::nonempty_subsets;
    use proptest::prelude::*;

    fn rv(n: u8, values: &[i64]) -> RVector<i64> {
        RVector::from_values(n, values.to_vec()).unwrap()
    }

    /// The inclusion matrix by its own block recursion
    /// `M_{k+1} = [[M_k, 0, M_k], [0, 1, 1], [M_k, 1, 1]]`, independent of
    /// the subset-intersection definition.
    fn build_m_blockwise(n: u8) -> InclusionMatrix<i64> {
        let mut m = InclusionMatrix::zeroed(1);
        m.set_entry(0, 0, 1);
        for _ in 1..n {
            let d = m.dim;
            let mut next = InclusionMatrix::zeroed(m.n + 1);
            for i in 0..d {
                for j in 0..d {
                    let v = m.entry(i, j);
                    next.set_entry(i, j, v);
                    next.set_entry(i, d + 1 + j, v);
                    next.set_entry(d + 1 + i, j, v);
                }
            }
            for j in 0..=d {
                next.set_entry(d, d + j, 1);
            }
            for i in 0..d {
                for j in 0..=d {
                    next.set_entry(d + 1 + i, d + j, 1);
                }
            }
            m = next;
        }
        m
    }

    #[test]
    fn build_m_small_cases() {
        let m1 = build_m::<i64>(1).unwrap();
        assert_eq!(m1.dim(), 1);
        assert_eq!(m1.entry(0, 0), 1);

        let m2 = build_m::<i64>(2).unwrap();
        let expected = [[1, 0, 1], [0, 1, 1], [1, 1, 1]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m2.entry(i, j), expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn build_m_matches_block_recursion() {
        for n in 1..=6 {
            assert_eq!(build_m::<i64>(n).unwrap(), build_m_blockwise(n), "n={n}");
        }
    }

    #[test]
    fn inverse_m_small_case() {
        let inv = inverse_m::<i64>(2).unwrap();
        let expected = [[0, -1, 1], [-1, 0, 1], [1, 1, -1]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inv.entry(i, j), expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn inverse_properties_up_to_six() {
        for n in 1..=6u8 {
            let m = build_m::<i64>(n).unwrap();
            let inv = inverse_m::<i64>(n).unwrap();
            assert!(m.multiply(&inv).is_identity(), "M * M^-1 != I at n={n}");
            assert!(inv.multiply(&m).is_identity(), "M^-1 * M != I at n={n}");
            for i in 0..inv.dim() {
                for j in 0..inv.dim() {
                    assert!(inv.entry(i, j).abs() <= 1, "entry out of -1..1 at n={n}");
                }
            }
            let total: i64 = (0..inv.dim())
                .map(|i| (0..inv.dim()).map(|j| inv.entry(i, j)).sum::<i64>())
                .sum();
            assert_eq!(total, 1, "e^t M^-1 e != 1 at n={n}");
        }
    }

    #[test]
    fn dense_ground_gate() {
        assert!(build_m::<i64>(11).is_err());
        assert!(inverse_m::<i64>(11).is_err());
    }

    #[test]
    fn solve_examples() {
        let x = solve_x(&rv(2, &[3, 3, 4]));
        assert_eq!(x.get_mask(0b01), 1);
        assert_eq!(x.get_mask(0b10), 1);
        assert_eq!(x.get_mask(0b11), 2);
        assert_eq!(x.get_mask(0b00), 0);

        let x = solve_x(&rv(2, &[2, 2, 3]));
        assert_eq!(
            (x.get_mask(1), x.get_mask(2), x.get_mask(3)),
            (1, 1, 1)
        );

        let x = solve_x(&rv(2, &[2, 2, 4]));
        assert_eq!(
            (x.get_mask(1), x.get_mask(2), x.get_mask(3)),
            (2, 2, 0)
        );
    }

    #[test]
    fn check_nonnegative_examples() {
        assert!(check_nonnegative(&rv(2, &[3, 3, 4])).is_empty());
        assert!(check_nonnegative(&rv(2, &[2, 2, 4])).is_empty());
        let violators = check_nonnegative(&rv(2, &[2, 2, 5]));
        assert_eq!(violators, vec![SubsetId::empty(2).unwrap()]);
        let x = solve_x(&rv(2, &[2, 2, 5]));
        assert_eq!(x.get_mask(0b11), -1);
    }

    #[test]
    fn verify_solution_examples() {
        let r = rv(2, &[3, 3, 4]);
        let mut x = PixelProfile::from_counts(2, vec![0, 1, 1, 2]).unwrap();
        assert!(verify_solution(&r, &x));
        x.set(SubsetId::empty(2).unwrap(), 5);
        assert!(verify_solution(&r, &x), "padding must be inert");
        x.set(SubsetId::new(1, 2).unwrap(), 2);
        assert!(!verify_solution(&r, &x));
    }

    #[test]
    fn solve_works_on_i128() {
        let r = RVector::<i128>::from_values(3, vec![1 << 31; 7]).unwrap();
        let x = solve_x(&r);
        assert!(verify_solution(&r, &x));
    }

    #[test]
    fn canonical_order_matches_matrix_indexing() {
        // Row/column i of the dense matrices is the i-th canonical subset.
        for n in 1..=6u8 {
            let order = nonempty_subsets(n).unwrap();
            let m = build_m::<i64>(n).unwrap();
            for (i, s) in order.iter().enumerate() {
                for (j, t) in order.iter().enumerate() {
                    let expect = if s.intersects(*t) { 1 } else { 0 };
                    assert_eq!(m.entry(i, j), expect);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn solve_then_verify(n in 1u8..=5, seed in any::<u64>()) {
            let dim = (1usize << n) - 1;
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 21) as i64
            };
            let values: Vec<i64> = (0..dim).map(|_| next()).collect();
            let r = RVector::from_values(n, values).unwrap();
            let x = solve_x(&r);
            prop_assert!(verify_solution(&r, &x));

            // Violator list empty exactly when the solution is non-negative.
            let violators = check_nonnegative(&r);
            prop_assert_eq!(violators.is_empty(), x.is_nonnegative());

            // Each violator is the complement of a negative entry.
            for v in violators {
                prop_assert!(x.get(v.complement()).is_negative());
            }
        }

        #[test]
        fn solve_matches_inverse_matrix(n in 1u8..=5, seed in any::<u64>()) {
            let dim = (1usize << n) - 1;
            let mut state = seed ^ 0x9e3779b97f4a7c15;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 21) as i64
            };
            let values: Vec<i64> = (0..dim).map(|_| next()).collect();
            let r = RVector::from_values(n, values.clone()).unwrap();
            let x = solve_x(&r);
            let inv = inverse_m::<i64>(n).unwrap();
            let by_matrix = inv.apply(&values);
            for (i, expected) in by_matrix.iter().enumerate() {
                prop_assert_eq!(x.get_mask((i + 1) as u16), *expected);
            }
        }
    }
}
