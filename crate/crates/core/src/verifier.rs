//! Independent certification of a scheme table, by brute force.
//!
//! Condition 1 (contrast): for every color assignment and every family
//! member, the Hamming weight of the OR of the member's rows must equal
//! the declared `h` or `l` level. Condition 2 (security): restricting the
//! profiles to any row subset `Q` must give identical restricted profiles
//! for any two assignments that agree inside the power set of `Q`.
//!
//! The security sweep groups the `2^|family|` assignments into classes by
//! their trace on `P(Q)` and asserts one canonical restricted profile per
//! class, which is the same verdict as the quadratic all-pairs check.

use crate::builder::{ColorAssignment, Construction, Provenance, SchemeTable};
use crate::contrast::{ContrastSpec, Levels};
use crate::error::{Error, Result};
use crate::lattice::{full_mask, SubsetId};
use crate::linsys::PixelProfile;
use crate::scalar::{Count, CountScalar};

/// Hamming weight of the OR of the given rows: every column whose support
/// meets `rows` contributes its multiplicity.
pub fn or_weight<C: CountScalar>(profile: &PixelProfile<C>, rows: SubsetId) -> C {
    assert!(!rows.is_empty(), "or_weight needs a nonempty row selection");
    profile
        .iter()
        .filter(|(support, _)| support.intersects(rows))
        .fold(C::zero(), |acc, (_, c)| acc + c)
}

/// Restriction to a row subset: column supports intersect down to `rows`
/// and the result is re-indexed onto the ground set `{1..|rows|}`. Totals
/// are preserved; columns missing `rows` land on the empty support.
pub fn restrict_profile<C: CountScalar>(
    profile: &PixelProfile<C>,
    rows: SubsetId,
) -> PixelProfile<C> {
    let q = rows.len().max(1) as u8;
    let mut out = PixelProfile::zero(q).expect("valid ground size");
    for (support, count) in profile.nonzero() {
        out.add(support.intersection(rows).compact_within(rows), count);
    }
    out
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LevelWitness<C: CountScalar> {
    pub assignment: u32,
    pub image: SubsetId,
    pub expected: C,
    pub observed: C,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SecurityWitness {
    pub rows: SubsetId,
    /// The shared trace on `P(rows)`, as assignment bits.
    pub class: u32,
    /// Two assignments in the class whose restrictions differ.
    pub left: u32,
    pub right: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConditionReport<W> {
    pub pass: bool,
    pub witnesses: Vec<W>,
}

impl<W> ConditionReport<W> {
    fn from_witnesses(witnesses: Vec<W>) -> Self {
        ConditionReport {
            pass: witnesses.is_empty(),
            witnesses,
        }
    }
}

/// The full verdict over one table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Certificate<C: CountScalar = Count> {
    pub condition1: ConditionReport<LevelWitness<C>>,
    pub condition2: ConditionReport<SecurityWitness>,
    /// Shape problems (non-uniform totals, negative counts); these fail a
    /// table before the two conditions even apply.
    pub structure: Vec<String>,
    pub observed_levels: Option<ContrastSpec<C>>,
    pub pass: bool,
}

/// Condition 1: observed OR weights against the declared levels.
pub fn verify_contrast<C: CountScalar>(table: &SchemeTable<C>) -> ConditionReport<LevelWitness<C>> {
    let mut witnesses = Vec::new();
    for assignment in table.assignments() {
        let profile = table.profile(assignment);
        for (i, member) in table.family().members().iter().enumerate() {
            let (h, l) = table.levels().get(*member);
            let expected = if assignment.contains_index(i) { h } else { l };
            let observed = or_weight(profile, *member);
            if observed != expected {
                witnesses.push(LevelWitness {
                    assignment: assignment.bits(),
                    image: *member,
                    expected,
                    observed,
                });
            }
        }
    }
    ConditionReport::from_witnesses(witnesses)
}

/// Condition 2: equality of restricted profiles within every trace class.
pub fn verify_security<C: CountScalar>(table: &SchemeTable<C>) -> ConditionReport<SecurityWitness> {
    let n = table.ground_size();
    let mut witnesses = Vec::new();
    for q_mask in 1..=full_mask(n) {
        let rows = SubsetId::new(q_mask as u32, n).expect("mask in range");
        let member_mask = table.family().members_within(rows);
        let mut canon: Vec<Option<(u32, PixelProfile<C>)>> =
            vec![None; 1usize << member_mask.count_ones()];
        for assignment in table.assignments() {
            let class = assignment.bits() & member_mask;
            let slot = compress_bits(class, member_mask) as usize;
            let restricted = restrict_profile(table.profile(assignment), rows);
            match &canon[slot] {
                None => canon[slot] = Some((assignment.bits(), restricted)),
                Some((first, expected)) => {
                    if *expected != restricted {
                        witnesses.push(SecurityWitness {
                            rows,
                            class,
                            left: *first,
                            right: assignment.bits(),
                        });
                    }
                }
            }
        }
    }
    ConditionReport::from_witnesses(witnesses)
}

/// Packs the bits of `value` that lie under `mask` into the low bits.
fn compress_bits(value: u32, mask: u32) -> u32 {
    let mut out = 0u32;
    let mut j = 0;
    for i in 0..32 {
        if mask & (1 << i) != 0 {
            if value & (1 << i) != 0 {
                out |= 1 << j;
            }
            j += 1;
        }
    }
    out
}

fn structure_problems<C: CountScalar>(table: &SchemeTable<C>) -> Vec<String> {
    let mut problems = Vec::new();
    for assignment in table.assignments() {
        let p = table.profile(assignment);
        if !p.is_nonnegative() {
            problems.push(format!(
                "assignment #{} has negative counts",
                assignment.bits()
            ));
        }
        if p.total() != table.expansion() {
            problems.push(format!(
                "assignment #{} totals {}, table says m = {}",
                assignment.bits(),
                p.total(),
                table.expansion()
            ));
        }
    }
    problems
}

/// Runs both conditions plus the structural checks and packages the verdict.
pub fn certify<C: CountScalar>(table: &SchemeTable<C>) -> Certificate<C> {
    let structure = structure_problems(table);
    let condition1 = verify_contrast(table);
    let condition2 = verify_security(table);
    let pass = structure.is_empty() && condition1.pass && condition2.pass;
    let observed_levels = if condition1.pass {
        measure_levels(table).ok()
    } else {
        None
    };
    Certificate {
        condition1,
        condition2,
        structure,
        observed_levels,
        pass,
    }
}

/// Reads the unique per-image `(h, l)` pair realized by the table.
/// Errors if any image sees more than one weight per color.
pub fn measure_levels<C: CountScalar>(table: &SchemeTable<C>) -> Result<ContrastSpec<C>> {
    let mut pairs = Vec::with_capacity(table.family().len());
    for (i, member) in table.family().members().iter().enumerate() {
        let mut h: Option<C> = None;
        let mut l: Option<C> = None;
        for assignment in table.assignments() {
            let w = or_weight(table.profile(assignment), *member);
            let slot = if assignment.contains_index(i) {
                &mut h
            } else {
                &mut l
            };
            match slot {
                None => *slot = Some(w),
                Some(prev) if *prev != w => {
                    return Err(Error::InconsistentLevels {
                        subset: *member,
                        detail: format!("weights {prev} and {w} for the same color"),
                    });
                }
                _ => {}
            }
        }
        let (h, l) = (
            h.ok_or_else(|| Error::InconsistentLevels {
                subset: *member,
                detail: "no black assignment".into(),
            })?,
            l.ok_or_else(|| Error::InconsistentLevels {
                subset: *member,
                detail: "no white assignment".into(),
            })?,
        );
        pairs.push((h, l));
    }
    ContrastSpec::new(table.family().clone(), pairs)
}

/// An explicit Boolean basis matrix given as its ordered column supports.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoolMatrix {
    n: u8,
    columns: Vec<u16>,
}

impl BoolMatrix {
    pub fn new(n: u8, columns: Vec<u16>) -> Result<Self> {
        crate::lattice::check_ground_size(n)?;
        if let Some(&c) = columns.iter().find(|c| **c > full_mask(n)) {
            return Err(Error::MaskOutOfRange {
                mask: c as u32,
                n,
            });
        }
        Ok(BoolMatrix { n, columns })
    }

    /// Builds from 0/1 rows (row i = transparency i+1).
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len() as u8;
        crate::lattice::check_ground_size(n)?;
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Format {
                what: "boolean matrix",
                detail: "ragged rows".into(),
            });
        }
        let mut columns = vec![0u16; m];
        for (i, row) in rows.iter().enumerate() {
            for (j, &bit) in row.iter().enumerate() {
                if bit > 1 {
                    return Err(Error::Format {
                        what: "boolean matrix",
                        detail: format!("entry {bit} is not a bit"),
                    });
                }
                if bit == 1 {
                    columns[j] |= 1 << i;
                }
            }
        }
        Ok(BoolMatrix { n, columns })
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn profile<C: CountScalar>(&self) -> PixelProfile<C> {
        let mut p = PixelProfile::zero(self.n).expect("valid ground size");
        for &c in &self.columns {
            p.add(SubsetId::new(c as u32, self.n).expect("mask in range"), C::one());
        }
        p
    }
}

/// Number of distinct column arrangements of a profile: `m! / Π c_T!`.
fn arrangement_count<C: CountScalar>(profile: &PixelProfile<C>) -> Result<u128> {
    let mut total: u64 = 0;
    let mut result: u128 = 1;
    for (_, c) in profile.nonzero() {
        let c = c.to_u64().ok_or_else(|| Error::UnsupportedCollection {
            reason: "profile count out of range".into(),
        })?;
        for i in 1..=c {
            total += 1;
            result = result
                .checked_mul(total as u128)
                .ok_or_else(|| Error::UnsupportedCollection {
                    reason: "collection too wide to canonicalize".into(),
                })?;
            result /= i as u128;
        }
    }
    Ok(result)
}

/// Imports explicit matrix collections, canonicalizing each matrix to its
/// column profile. Only collections that form exactly one column
/// permutation class per assignment (each distinct arrangement with equal
/// multiplicity) are supported; anything else is rejected rather than
/// silently mis-verified. Certification still happens separately.
pub fn import_matrix_collections<C: CountScalar>(
    family: &crate::lattice::SubsetFamily,
    collections: &[Vec<BoolMatrix>],
) -> Result<SchemeTable<C>> {
    let n = family.ground_size();
    if collections.len() != 1usize << family.len() {
        return Err(Error::Format {
            what: "matrix collections",
            detail: format!(
                "expected {} collections, got {}",
                1usize << family.len(),
                collections.len()
            ),
        });
    }
    let mut profiles: Vec<PixelProfile<C>> = Vec::with_capacity(collections.len());
    let mut m: Option<C> = None;
    for (bits, collection) in collections.iter().enumerate() {
        if collection.is_empty() {
            return Err(Error::UnsupportedCollection {
                reason: format!("assignment #{bits} has no matrices"),
            });
        }
        let profile: PixelProfile<C> = collection[0].profile();
        let mut multiplicity = std::collections::BTreeMap::new();
        for mat in collection {
            if mat.n != n {
                return Err(Error::GroundSetMismatch {
                    left: n,
                    right: mat.n,
                });
            }
            if mat.profile::<C>() != profile {
                return Err(Error::UnsupportedCollection {
                    reason: format!(
                        "assignment #{bits} mixes matrices with different column profiles"
                    ),
                });
            }
            *multiplicity.entry(mat.columns.clone()).or_insert(0u64) += 1;
        }
        let orbit = arrangement_count(&profile)?;
        if multiplicity.len() as u128 != orbit {
            return Err(Error::UnsupportedCollection {
                reason: format!(
                    "assignment #{bits} covers {} of {orbit} column arrangements",
                    multiplicity.len()
                ),
            });
        }
        let first = *multiplicity.values().next().expect("nonempty");
        if multiplicity.values().any(|&v| v != first) {
            return Err(Error::UnsupportedCollection {
                reason: format!("assignment #{bits} weights arrangements unevenly"),
            });
        }
        let total = profile.total();
        match m {
            None => m = Some(total),
            Some(prev) if prev != total => {
                return Err(Error::UnsupportedCollection {
                    reason: "collections disagree on the pixel expansion".into(),
                });
            }
            _ => {}
        }
        profiles.push(profile);
    }
    let m = m.expect("at least one collection");
    let levels = observed_levels_from_profiles(family, &profiles)?;
    SchemeTable::from_parts(
        family.clone(),
        m,
        levels,
        profiles,
        Provenance {
            construction: Construction::Imported,
            black_padding: 0,
        },
    )
}

/// Reconstructs a full level map from observed OR weights; family members
/// must be consistent, other subsets record their observed weight range.
fn observed_levels_from_profiles<C: CountScalar>(
    family: &crate::lattice::SubsetFamily,
    profiles: &[PixelProfile<C>],
) -> Result<Levels<C>> {
    let n = family.ground_size();
    Levels::from_fn(n, |t| {
        let mut min = None;
        let mut max = None;
        let mut h = None;
        let mut l = None;
        for (bits, p) in profiles.iter().enumerate() {
            let w = or_weight(p, t);
            min = Some(min.map_or(w, |v: C| v.min(w)));
            max = Some(max.map_or(w, |v: C| v.max(w)));
            if let Some(i) = family.index_of(t) {
                if bits & (1 << i) != 0 {
                    h = Some(w);
                } else {
                    l = Some(w);
                }
            }
        }
        match (h, l) {
            (Some(h), Some(l)) => (h, l),
            _ => (max.unwrap_or(C::zero()), min.unwrap_or(C::zero())),
        }
    })
}
