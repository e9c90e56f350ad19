//! Contrast-level calculus: the existence inequalities, the tight level
//! formula, the pixel-expansion lower bound, the contrast trade-off, and
//! the adjusted levels behind the improved construction.
//!
//! A full level map assigns every nonempty subset `T` a pair `(h_T, l_T)`:
//! the black count of a stacked block when the image on `T` is black
//! (resp. white). A scheme with those levels exists iff for every proper
//! subset `S`
//!
//! ```text
//! Σ_{S ⊆ T, |T| ≡ |S| (mod 2)} h_T  <=  Σ_{S ⊆ T, |T| ≢ |S| (mod 2)} l_T .
//! ```
//!
//! For fixed deltas `δ_T = h_T - l_T` there is exactly one level map
//! saturating every inequality ([`tight_levels`]); its top entry
//! `Σ δ_T 2^(|T|-1)` is the minimal full-stack black count. Contrast is
//! tracked as exact rationals throughout; no floating point.

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{check_ground_size, full_mask, submasks, SubsetFamily, SubsetId};
use crate::scalar::{from_u64, two_pow, Count, CountScalar};

/// Hard cap on any single level value: keeps every alternating sum that
/// the solver forms comfortably inside 64 bits.
pub const MAX_LEVEL: u64 = 1 << 31;

/// A full `(h, l)` map over every nonempty subset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Levels<C: CountScalar = Count> {
    n: u8,
    pairs: Vec<(C, C)>, // index = mask - 1
}

impl<C: CountScalar> Levels<C> {
    pub fn from_pairs(n: u8, pairs: Vec<(C, C)>) -> Result<Self> {
        check_ground_size(n)?;
        let dim = (1usize << n) - 1;
        if pairs.len() != dim {
            return Err(Error::Format {
                what: "level map",
                detail: format!("expected {dim} pairs, got {}", pairs.len()),
            });
        }
        Ok(Levels { n, pairs })
    }

    pub fn from_fn(n: u8, mut f: impl FnMut(SubsetId) -> (C, C)) -> Result<Self> {
        check_ground_size(n)?;
        let pairs = (1..1u32 << n)
            .map(|mask| f(SubsetId::new(mask, n).expect("mask in range")))
            .collect();
        Self::from_pairs(n, pairs)
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    /// `(h_T, l_T)`; the empty set yields `(0, 0)`.
    #[inline]
    pub fn get(&self, t: SubsetId) -> (C, C) {
        debug_assert_eq!(t.ground_size(), self.n);
        self.get_mask(t.mask())
    }

    #[inline]
    pub(crate) fn get_mask(&self, mask: u16) -> (C, C) {
        if mask == 0 {
            (C::zero(), C::zero())
        } else {
            self.pairs[(mask - 1) as usize]
        }
    }

    #[inline]
    pub fn h(&self, t: SubsetId) -> C {
        self.get(t).0
    }

    #[inline]
    pub fn l(&self, t: SubsetId) -> C {
        self.get(t).1
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, C, C)> + '_ {
        self.pairs.iter().enumerate().map(move |(i, &(h, l))| {
            (
                SubsetId::new(i as u32 + 1, self.n).expect("mask in range"),
                h,
                l,
            )
        })
    }

    /// Shifts every level up by `pad` (the effect of appending `pad`
    /// always-black columns).
    pub fn shifted(&self, pad: C) -> Levels<C> {
        Levels {
            n: self.n,
            pairs: self.pairs.iter().map(|&(h, l)| (h + pad, l + pad)).collect(),
        }
    }

    /// Checks that every level lies in `[0, MAX_LEVEL]`.
    pub fn validate_bounds(&self) -> Result<()> {
        for (s, h, l) in self.iter() {
            for v in [h, l] {
                if v.is_negative() {
                    return Err(Error::NegativeValue {
                        what: format!("level for {s}"),
                        value: v.to_i64().unwrap_or(-1),
                    });
                }
                if v.to_u64().map_or(true, |v| v > MAX_LEVEL) {
                    return Err(Error::LevelTooLarge {
                        value: v.to_i64().unwrap_or(i64::MAX),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-image contrast targets for the members of a family:
/// `h_T > l_T >= 0` for every `T` in the family.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContrastSpec<C: CountScalar = Count> {
    family: SubsetFamily,
    pairs: Vec<(C, C)>, // aligned with family.members()
}

impl<C: CountScalar> ContrastSpec<C> {
    pub fn new(family: SubsetFamily, pairs: Vec<(C, C)>) -> Result<Self> {
        if pairs.len() != family.len() {
            return Err(Error::Format {
                what: "contrast spec",
                detail: format!(
                    "expected {} level pairs, got {}",
                    family.len(),
                    pairs.len()
                ),
            });
        }
        for (m, &(h, l)) in family.members().iter().zip(&pairs) {
            if l.is_negative() || h <= l {
                return Err(Error::NonPositiveContrast {
                    subset: *m,
                    h: h.to_i64().unwrap_or(-1),
                    l: l.to_i64().unwrap_or(-1),
                });
            }
        }
        Ok(ContrastSpec { family, pairs })
    }

    #[inline]
    pub fn family(&self) -> &SubsetFamily {
        &self.family
    }

    pub fn get(&self, t: SubsetId) -> Option<(C, C)> {
        self.family.index_of(t).map(|i| self.pairs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, C, C)> + '_ {
        self.family
            .members()
            .iter()
            .zip(&self.pairs)
            .map(|(m, &(h, l))| (*m, h, l))
    }

    /// The per-image deltas `h_T - l_T`, zero off the family.
    pub fn deltas(&self) -> DeltaSpec<C> {
        DeltaSpec::from_fn(self.family.ground_size(), |t| {
            self.get(t).map_or(C::zero(), |(h, l)| h - l)
        })
        .expect("ground size already validated")
    }
}

/// Contrast deltas `δ_T >= 0` for every nonempty `T`; `δ_T = 0` encodes
/// that `T` carries no image.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeltaSpec<C: CountScalar = Count> {
    n: u8,
    deltas: Vec<C>, // index = mask - 1
}

impl<C: CountScalar> DeltaSpec<C> {
    pub fn from_values(n: u8, deltas: Vec<C>) -> Result<Self> {
        check_ground_size(n)?;
        let dim = (1usize << n) - 1;
        if deltas.len() != dim {
            return Err(Error::Format {
                what: "delta spec",
                detail: format!("expected {dim} entries, got {}", deltas.len()),
            });
        }
        if let Some((i, v)) = deltas.iter().enumerate().find(|(_, v)| v.is_negative()) {
            let _ = v;
            return Err(Error::InvalidDelta {
                subset: SubsetId::new(i as u32 + 1, n).expect("mask in range"),
            });
        }
        Ok(DeltaSpec { n, deltas })
    }

    pub fn from_fn(n: u8, mut f: impl FnMut(SubsetId) -> C) -> Result<Self> {
        check_ground_size(n)?;
        let deltas = (1..1u32 << n)
            .map(|mask| f(SubsetId::new(mask, n).expect("mask in range")))
            .collect();
        Self::from_values(n, deltas)
    }

    /// `δ = 1` on the family members, 0 elsewhere.
    pub fn ones_on(family: &SubsetFamily) -> DeltaSpec<C> {
        Self::from_fn(family.ground_size(), |t| {
            if family.contains(t) {
                C::one()
            } else {
                C::zero()
            }
        })
        .expect("family ground size is valid")
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    #[inline]
    pub fn get(&self, t: SubsetId) -> C {
        debug_assert_eq!(t.ground_size(), self.n);
        self.get_mask(t.mask())
    }

    #[inline]
    pub(crate) fn get_mask(&self, mask: u16) -> C {
        if mask == 0 {
            C::zero()
        } else {
            self.deltas[(mask - 1) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, C)> + '_ {
        self.deltas.iter().enumerate().map(move |(i, &v)| {
            (
                SubsetId::new(i as u32 + 1, self.n).expect("mask in range"),
                v,
            )
        })
    }

    /// Checks `δ >= 1` exactly on the members of `family`.
    pub fn matches_family(&self, family: &SubsetFamily) -> Result<()> {
        for (t, d) in self.iter() {
            let member = family.contains(t);
            if member && d < C::one() || !member && !d.is_zero() {
                return Err(Error::InvalidDelta { subset: t });
            }
        }
        Ok(())
    }
}

/// Per-image contrast targets as exact rationals, one per nonempty subset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContrastTargets<C: CountScalar = Count> {
    n: u8,
    values: Vec<Ratio<C>>, // index = mask - 1
}

impl<C: CountScalar> ContrastTargets<C> {
    pub fn from_values(n: u8, values: Vec<Ratio<C>>) -> Result<Self> {
        check_ground_size(n)?;
        let dim = (1usize << n) - 1;
        if values.len() != dim {
            return Err(Error::Format {
                what: "contrast targets",
                detail: format!("expected {dim} entries, got {}", values.len()),
            });
        }
        if values.iter().any(|v| v < &Ratio::zero()) {
            return Err(Error::NegativeValue {
                what: "contrast target".into(),
                value: -1,
            });
        }
        Ok(ContrastTargets { n, values })
    }

    pub fn from_fn(n: u8, mut f: impl FnMut(SubsetId) -> Ratio<C>) -> Result<Self> {
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

    #[inline]
    pub fn get(&self, t: SubsetId) -> Ratio<C> {
        debug_assert_eq!(t.ground_size(), self.n);
        self.values[(t.mask() - 1) as usize].clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, Ratio<C>)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| {
            (
                SubsetId::new(i as u32 + 1, self.n).expect("mask in range"),
                v.clone(),
            )
        })
    }
}

/// Evaluates the existence inequality at every proper subset `S` (the empty
/// set included) and returns the violators in ascending mask order. An
/// empty result means a scheme with these levels exists.
pub fn existence_check<C: CountScalar>(levels: &Levels<C>) -> Vec<SubsetId> {
    let n = levels.ground_size();
    let full = full_mask(n);
    let mut violators = Vec::new();
    for s_mask in 0..full {
        let s_len = s_mask.count_ones();
        let free = full & !s_mask;
        let mut lhs = C::zero();
        let mut rhs = C::zero();
        for sub in submasks(free) {
            let t = s_mask | sub;
            let (h, l) = levels.get_mask(t);
            if (t.count_ones() + s_len) % 2 == 0 {
                lhs += h;
            } else {
                rhs += l;
            }
        }
        if lhs > rhs {
            violators.push(SubsetId::new(s_mask as u32, n).expect("mask in range"));
        }
    }
    violators
}

/// The unique level map with deltas `δ` that saturates every existence
/// inequality:
///
/// ```text
/// h_T = Σ_{T' ≠ ∅} δ_{T'} 2^(|T'|-1)  -  Σ_{T ⊊ T'} δ_{T'} 2^(|T'|-1-|T|),
/// l_T = h_T - δ_T .
/// ```
pub fn tight_levels<C: CountScalar>(delta: &DeltaSpec<C>) -> Levels<C> {
    let n = delta.ground_size();
    let full = full_mask(n);
    let mut total = C::zero();
    for t in 1..=full {
        total += delta.get_mask(t) * two_pow::<C>(t.count_ones() - 1);
    }
    Levels::from_fn(n, |t| {
        let t_mask = t.mask();
        let t_len = t_mask.count_ones();
        let free = full & !t_mask;
        let mut correction = C::zero();
        for sub in submasks(free) {
            if sub == 0 {
                continue; // proper supersets only
            }
            let sup = t_mask | sub;
            correction += delta.get_mask(sup) * two_pow::<C>(sup.count_ones() - 1 - t_len);
        }
        let h = total - correction;
        (h, h - delta.get_mask(t_mask))
    })
    .expect("valid ground size")
}

/// Minimal pixel expansion of a scheme carrying an image on every nonempty
/// subset: `(3^n - 1) / 2`.
pub fn lower_bound<C: CountScalar>(n: u8) -> Result<C> {
    check_ground_size(n)?;
    let pow = 3u64.pow(n as u32);
    Ok(from_u64::<C>((pow - 1) / 2))
}

/// Pixel expansion of the per-member block construction:
/// `Σ_{T ∈ family} 2^(|T|-1)`.
pub fn droste_expansion<C: CountScalar>(family: &SubsetFamily) -> C {
    family
        .members()
        .iter()
        .fold(C::zero(), |acc, m| acc + two_pow::<C>(m.len() - 1))
}

/// The weighted contrast sum `Σ 2^(|T|-1) α_T` as an exact rational;
/// feasible target vectors keep it at most 1.
pub fn tradeoff_sum<C: CountScalar>(targets: &ContrastTargets<C>) -> Ratio<C> {
    targets.iter().fold(Ratio::zero(), |acc, (t, alpha)| {
        acc + alpha * Ratio::from_integer(two_pow::<C>(t.len() - 1))
    })
}

/// Realizes contrast targets: finds integer deltas and a denominator `M`
/// such that the tight-level scheme for those deltas, padded with
/// always-black columns to `M` total columns, has contrast exactly
/// `δ_T / M`, with each achieved contrast within `epsilon` below its
/// target (`epsilon = 0` demands exact realization).
///
/// Scans denominators upward and takes the first `M` whose floor deltas
/// `δ_T = ⌊α_T · M⌋` leave every deficit either zero or strictly below
/// `epsilon`; ties are impossible, so the result is deterministic.
pub fn realize_contrast<C: CountScalar>(
    targets: &ContrastTargets<C>,
    epsilon: Ratio<C>,
) -> Result<(DeltaSpec<C>, C)> {
    if epsilon < Ratio::zero() {
        return Err(Error::NegativeValue {
            what: "epsilon".into(),
            value: -1,
        });
    }
    let sum = tradeoff_sum(targets);
    if sum > Ratio::from_integer(C::one()) {
        return Err(Error::TradeoffExceeded {
            sum: format!("{}/{}", sum.numer(), sum.denom()),
        });
    }

    let max_denom_cap = C::from_u64(1_000_000_000).unwrap_or_else(C::max_value);
    let scan_limit = if epsilon.is_zero() {
        // Exact mode: the lcm of the target denominators realizes every
        // target with zero deficit.
        let mut l = C::one();
        for (_, alpha) in targets.iter() {
            l = num_integer::lcm(l, *alpha.denom());
            if l > max_denom_cap {
                return Err(Error::Tractability {
                    detail: "contrast target denominators too large for exact realization".into(),
                });
            }
        }
        l
    } else {
        // deficit < 1/M <= epsilon once M >= 1/epsilon.
        let bound = epsilon.recip().ceil().to_integer();
        if bound > max_denom_cap {
            return Err(Error::Tractability {
                detail: "epsilon too small".into(),
            });
        }
        bound.max(C::one())
    };

    let mut m = C::one();
    loop {
        let m_ratio = Ratio::from_integer(m);
        let mut deltas = Vec::with_capacity(targets.values.len());
        let mut ok = true;
        for (_, alpha) in targets.iter() {
            let d = (alpha.clone() * m_ratio.clone()).floor().to_integer();
            let deficit = alpha - Ratio::new(d, m);
            if !(deficit.is_zero() || deficit < epsilon) {
                ok = false;
                break;
            }
            deltas.push(d);
        }
        if ok {
            let spec = DeltaSpec::from_values(targets.n, deltas)?;
            let weighted = spec
                .iter()
                .fold(C::zero(), |acc, (t, d)| acc + d * two_pow::<C>(t.len() - 1));
            debug_assert!(weighted <= m, "floor deltas exceed the denominator");
            return Ok((spec, m));
        }
        if m >= scan_limit {
            return Err(Error::Internal(
                "denominator scan exhausted below its proven bound".into(),
            ));
        }
        m += C::one();
    }
}

/// Adjusted levels for the improved construction around an even pivot set
/// `pivot ∉ family`. The map lowers the inner block on the power set of
/// the pivot by one subpixel (two at the pivot itself, whose two r-value
/// choices are recorded as `l = h + 1`), and layers the usual per-member
/// block counts for members outside the pivot on top. The result satisfies
/// every existence inequality and its largest level is one below the
/// per-member block expansion.
pub fn improved_levels<C: CountScalar>(
    family: &SubsetFamily,
    pivot: SubsetId,
) -> Result<Levels<C>> {
    let n = family.ground_size();
    if pivot.ground_size() != n {
        return Err(Error::GroundSetMismatch {
            left: n,
            right: pivot.ground_size(),
        });
    }
    if family.contains(pivot) {
        return Err(Error::ImprovedHypothesis {
            clause: format!("pivot {pivot} must not carry an image"),
        });
    }
    if pivot.is_empty() || pivot.len() % 2 != 0 {
        return Err(Error::ImprovedHypothesis {
            clause: format!("pivot {pivot} must be nonempty of even size"),
        });
    }
    let sub = family.restrict_to(pivot);
    let covered = sub.union_support().expand_within(pivot);
    if covered != pivot {
        return Err(Error::ImprovedHypothesis {
            clause: format!(
                "family members inside {pivot} only cover {covered}; they must not all fit a proper subset"
            ),
        });
    }

    let inner_tight = tight_levels::<C>(&DeltaSpec::ones_on(&sub));
    let q = pivot.len() as u8;
    let inner_top = inner_tight.h(SubsetId::full(q).expect("pivot is nonempty"));

    // Per-member block columns for members outside the pivot.
    let outside = family
        .members()
        .iter()
        .filter(|m| !m.is_subset_of(pivot))
        .fold(C::zero(), |acc, m| acc + two_pow::<C>(m.len() - 1));

    let two = C::one() + C::one();
    let levels = Levels::from_fn(n, |s| {
        let base = if s.is_subset_of(pivot) {
            if s == pivot {
                inner_top - two
            } else {
                inner_tight.h(s.compact_within(pivot)) - C::one()
            }
        } else {
            inner_top - C::one()
        };
        let correction = family
            .members()
            .iter()
            .filter(|m| s.is_subset_of(**m) && s != **m && !m.is_subset_of(pivot))
            .fold(C::zero(), |acc, m| acc + two_pow::<C>(m.len() - 1 - s.len()));
        let h = base + outside - correction;
        let delta = if s == pivot {
            -C::one()
        } else if family.contains(s) {
            C::one()
        } else {
            C::zero()
        };
        (h, h - delta)
    })
    .expect("valid ground size");

    for (s, h, l) in levels.iter() {
        if h.is_negative() || l.is_negative() {
            return Err(Error::Internal(format!(
                "improved levels went negative at {s}: h={h}, l={l}"
            )));
        }
    }
    Ok(levels)
}
