//! Scheme construction: the per-member block construction, the general
//! builder that solves the subset linear system for every color
//! assignment, and the improved construction that beats the block scheme
//! whenever a qualifying even pivot set exists.

use crate::contrast::{
    droste_expansion, existence_check, improved_levels, tight_levels, DeltaSpec, Levels,
};
use crate::error::{Error, Result};
use crate::lattice::{
    check_ground_size, full_mask, submasks, SubsetFamily, SubsetId,
};
use crate::linsys::{solve_x, PixelProfile, RVector};
use crate::scalar::{Count, CountScalar};

/// Table entries (profiles times profile width) are capped to keep table
/// construction at desk scale.
const MAX_TABLE_ENTRIES: u64 = 1 << 22;

/// Which images are black at the current pixel, as a bit mask over the
/// family's canonical member order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ColorAssignment(u32);

impl ColorAssignment {
    pub const EMPTY: ColorAssignment = ColorAssignment(0);

    pub fn from_bits(bits: u32, family: &SubsetFamily) -> Result<Self> {
        if family.len() < 32 && bits >> family.len() != 0 {
            return Err(Error::Format {
                what: "color assignment",
                detail: format!("bits {bits:#x} exceed family of {} members", family.len()),
            });
        }
        Ok(ColorAssignment(bits))
    }

    /// Builds from the set of members whose image is black.
    pub fn from_black_members<I: IntoIterator<Item = SubsetId>>(
        family: &SubsetFamily,
        black: I,
    ) -> Result<Self> {
        let mut bits = 0u32;
        for t in black {
            match family.index_of(t) {
                Some(i) => bits |= 1 << i,
                None => return Err(Error::UnknownSecret { subset: t }),
            }
        }
        Ok(ColorAssignment(bits))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains_index(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn contains(self, family: &SubsetFamily, t: SubsetId) -> bool {
        family
            .index_of(t)
            .is_some_and(|i| self.contains_index(i))
    }

    pub fn black_members(self, family: &SubsetFamily) -> Vec<SubsetId> {
        family
            .members()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.contains_index(*i))
            .map(|(_, m)| *m)
            .collect()
    }

    /// All 2^|family| assignments in ascending bit order.
    pub fn all(family: &SubsetFamily) -> impl Iterator<Item = ColorAssignment> {
        (0..(1u64 << family.len())).map(|bits| ColorAssignment(bits as u32))
    }

    pub fn describe(self, family: &SubsetFamily) -> String {
        let parts: Vec<String> = self
            .black_members(family)
            .iter()
            .map(|m| m.to_string())
            .collect();
        if parts.is_empty() {
            "∅".to_string()
        } else {
            parts.join(",")
        }
    }
}

/// How a table came to be.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Construction {
    /// Per-member threshold blocks.
    Droste,
    /// Solved from a level map.
    FromLevels,
    /// Improved construction around an even pivot set.
    Improved { pivot: SubsetId },
    /// Witness extracted by the exhaustive search.
    Search,
    /// Imported from an explicit matrix collection.
    Imported,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Provenance {
    pub construction: Construction,
    /// Always-black padding columns appended after construction.
    pub black_padding: u64,
}

impl Provenance {
    fn new(construction: Construction) -> Self {
        Provenance {
            construction,
            black_padding: 0,
        }
    }
}

/// A complete scheme: one pixel profile per color assignment, together
/// with the level map the profiles realize. Immutable once built; encode
/// workers share it freely.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SchemeTable<C: CountScalar = Count> {
    n: u8,
    family: SubsetFamily,
    m: C,
    levels: Levels<C>,
    profiles: Vec<PixelProfile<C>>,
    provenance: Provenance,
}

impl<C: CountScalar> SchemeTable<C> {
    /// Assembles and validates a table: one profile per assignment, all
    /// non-negative, all totalling `m`.
    pub fn from_parts(
        family: SubsetFamily,
        m: C,
        levels: Levels<C>,
        profiles: Vec<PixelProfile<C>>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = family.ground_size();
        if levels.ground_size() != n {
            return Err(Error::GroundSetMismatch {
                left: n,
                right: levels.ground_size(),
            });
        }
        check_table_size(n, family.len())?;
        if profiles.len() != 1usize << family.len() {
            return Err(Error::Format {
                what: "scheme table",
                detail: format!(
                    "expected {} profiles, got {}",
                    1usize << family.len(),
                    profiles.len()
                ),
            });
        }
        for (bits, p) in profiles.iter().enumerate() {
            if p.ground_size() != n {
                return Err(Error::GroundSetMismatch {
                    left: n,
                    right: p.ground_size(),
                });
            }
            if !p.is_nonnegative() {
                return Err(Error::InfeasibleAssignment {
                    assignment: format!("assignment #{bits}"),
                    violations: p.negative_supports(),
                });
            }
            if p.total() != m {
                return Err(Error::Format {
                    what: "scheme table",
                    detail: format!(
                        "profile #{bits} totals {}, expected m = {m}",
                        p.total()
                    ),
                });
            }
        }
        Ok(SchemeTable {
            n,
            family,
            m,
            levels,
            profiles,
            provenance,
        })
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    #[inline]
    pub fn family(&self) -> &SubsetFamily {
        &self.family
    }

    #[inline]
    pub fn expansion(&self) -> C {
        self.m
    }

    #[inline]
    pub fn levels(&self) -> &Levels<C> {
        &self.levels
    }

    #[inline]
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    #[inline]
    pub fn profile(&self, assignment: ColorAssignment) -> &PixelProfile<C> {
        &self.profiles[assignment.bits() as usize]
    }

    pub fn profiles(&self) -> &[PixelProfile<C>] {
        &self.profiles
    }

    pub fn assignments(&self) -> impl Iterator<Item = ColorAssignment> {
        ColorAssignment::all(&self.family)
    }

    /// Appends `extra` always-black columns to every profile; levels shift
    /// up accordingly and contrast dilutes from `δ/m` to `δ/(m+extra)`.
    pub fn pad_black(&self, extra: C) -> Result<SchemeTable<C>> {
        if extra.is_negative() {
            return Err(Error::NegativeValue {
                what: "padding".into(),
                value: extra.to_i64().unwrap_or(-1),
            });
        }
        let full = SubsetId::full(self.n).expect("valid ground size");
        let mut profiles = self.profiles.clone();
        for p in &mut profiles {
            p.add(full, extra);
        }
        let mut provenance = self.provenance.clone();
        provenance.black_padding += extra.to_u64().unwrap_or(0);
        SchemeTable::from_parts(
            self.family.clone(),
            self.m + extra,
            self.levels.shifted(extra),
            profiles,
            provenance,
        )
    }

    /// Relabels the transparencies by a permutation (`perm[i-1]` is the new
    /// label of transparency `i`). Used by the metamorphic tests.
    pub fn relabel(&self, perm: &[u8]) -> SchemeTable<C> {
        let family = self.family.relabel(perm);
        // Member order may change; remap assignment bits accordingly.
        let mut index_map = vec![0usize; self.family.len()];
        for (i, m) in self.family.members().iter().enumerate() {
            index_map[i] = family
                .index_of(m.relabel(perm))
                .expect("relabeled member stays in family");
        }
        let mut profiles = vec![PixelProfile::zero(self.n).expect("valid n"); self.profiles.len()];
        for (bits, p) in self.profiles.iter().enumerate() {
            let mut new_bits = 0usize;
            for (i, mapped) in index_map.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    new_bits |= 1 << mapped;
                }
            }
            let mut q = PixelProfile::zero(self.n).expect("valid n");
            for (support, count) in p.iter() {
                q.set(support.relabel(perm), count);
            }
            profiles[new_bits] = q;
        }
        let levels = Levels::from_fn(self.n, |t| {
            // t's preimage under the permutation
            let mut inverse = vec![0u8; self.n as usize];
            for (i, &img) in perm.iter().enumerate() {
                inverse[(img - 1) as usize] = i as u8 + 1;
            }
            self.levels.get(t.relabel(&inverse))
        })
        .expect("valid ground size");
        SchemeTable {
            n: self.n,
            family,
            m: self.m,
            levels,
            profiles,
            provenance: self.provenance.clone(),
        }
    }
}

fn check_table_size(n: u8, members: usize) -> Result<()> {
    let entries = (1u64 << members).saturating_mul(1u64 << n);
    if members > 16 || entries > MAX_TABLE_ENTRIES {
        return Err(Error::Tractability {
            detail: format!(
                "table with {members} images on {n} transparencies needs {entries} profile entries"
            ),
        });
    }
    Ok(())
}

/// The two column profiles of the (k,k)-threshold scheme on `{1..k}`:
/// the white profile has one column per even-cardinality subset, the
/// black profile one per odd-cardinality subset. Any k-1 rows restrict to
/// identical profiles, so only the full stack distinguishes the colors.
pub fn kk_threshold_profiles<C: CountScalar>(
    k: u8,
) -> Result<(PixelProfile<C>, PixelProfile<C>)> {
    check_ground_size(k)?;
    let mut white = PixelProfile::zero(k)?;
    let mut black = PixelProfile::zero(k)?;
    for mask in 0..(1u32 << k) {
        let target = if mask.count_ones() % 2 == 0 {
            &mut white
        } else {
            &mut black
        };
        target.add(SubsetId::new(mask, k).expect("mask in range"), C::one());
    }
    Ok((white, black))
}

/// The per-member block construction: for each family member `T` a
/// (|T|,|T|)-threshold block of `2^(|T|-1)` subpixels whose rows outside
/// `T` are always black. Expansion is `Σ 2^(|T|-1)`; every realized
/// contrast is `1/m`.
pub fn droste_scheme<C: CountScalar>(family: &SubsetFamily) -> Result<SchemeTable<C>> {
    let n = family.ground_size();
    check_table_size(n, family.len())?;
    let m = droste_expansion::<C>(family);
    let levels = tight_levels(&DeltaSpec::ones_on(family));
    let full = full_mask(n);

    let mut profiles = Vec::with_capacity(1usize << family.len());
    for assignment in ColorAssignment::all(family) {
        let mut profile = PixelProfile::zero(n)?;
        for (i, t) in family.members().iter().enumerate() {
            let black = assignment.contains_index(i);
            let outside = full & !t.mask();
            for v in submasks(t.mask()) {
                let odd = v.count_ones() % 2 == 1;
                if odd == black {
                    profile.add(
                        SubsetId::new((v | outside) as u32, n).expect("mask in range"),
                        C::one(),
                    );
                }
            }
        }
        debug_assert_eq!(profile.total(), m, "block construction total");
        profiles.push(profile);
    }
    SchemeTable::from_parts(
        family.clone(),
        m,
        levels,
        profiles,
        Provenance::new(Construction::Droste),
    )
}

/// The black-count vector a color assignment demands. Members take `h` or
/// `l` according to their color. A subset `T` outside the family takes the
/// `l_T` candidate unless the solution restricted to `T` would go negative,
/// in which case it falls back to `h_T`; both candidates only depend on
/// colors inside the power set of `T`, which is what makes the restriction
/// profiles independent of everything outside it.
pub fn canonical_r<C: CountScalar>(
    family: &SubsetFamily,
    assignment: ColorAssignment,
    levels: &Levels<C>,
) -> RVector<C> {
    let n = family.ground_size();
    assert_eq!(levels.ground_size(), n, "level map ground set");
    let full = full_mask(n);
    let mut values = vec![C::zero(); full as usize]; // by mask - 1

    for t_mask in 1..=full {
        let t = SubsetId::new(t_mask as u32, n).expect("mask in range");
        let (h, l) = levels.get(t);
        let value = match family.index_of(t) {
            Some(i) => {
                if assignment.contains_index(i) {
                    h
                } else {
                    l
                }
            }
            None => {
                if h == l || sub_solution_nonnegative(t, &values, l) {
                    l
                } else if sub_solution_nonnegative(t, &values, h) {
                    h
                } else {
                    // No candidate keeps the restriction non-negative; keep
                    // the default so the full solve reports the failure.
                    l
                }
            }
        };
        values[(t_mask - 1) as usize] = value;
    }
    RVector::from_values(n, values).expect("levels were validated non-negative")
}

/// Solves the system restricted to the rows of `t` (targets for proper
/// subsets already fixed in `values`, `top` for `t` itself) and reports
/// whether the restricted profile is componentwise non-negative.
fn sub_solution_nonnegative<C: CountScalar>(t: SubsetId, values: &[C], top: C) -> bool {
    if top.is_negative() {
        return false;
    }
    let q = t.len() as u8;
    let r = RVector::from_fn(q, |sc| {
        let orig = sc.expand_within(t);
        if orig == t {
            top
        } else {
            values[(orig.mask() - 1) as usize]
        }
    });
    match r {
        Ok(r) => solve_x(&r).is_nonnegative(),
        Err(_) => false,
    }
}

/// Builds a scheme table realizing a full level map: solves the linear
/// system for every color assignment and equalizes totals with all-white
/// padding columns (which perturb no black count).
pub fn build_scheme<C: CountScalar>(
    family: &SubsetFamily,
    levels: &Levels<C>,
) -> Result<SchemeTable<C>> {
    let n = family.ground_size();
    if levels.ground_size() != n {
        return Err(Error::GroundSetMismatch {
            left: n,
            right: levels.ground_size(),
        });
    }
    levels.validate_bounds()?;
    for m in family.members() {
        let (h, l) = levels.get(*m);
        if h <= l {
            return Err(Error::NonPositiveContrast {
                subset: *m,
                h: h.to_i64().unwrap_or(-1),
                l: l.to_i64().unwrap_or(-1),
            });
        }
    }
    let violations = existence_check(levels);
    if !violations.is_empty() {
        return Err(Error::InfeasibleLevels { violations });
    }
    check_table_size(n, family.len())?;

    let mut raw = Vec::with_capacity(1usize << family.len());
    let mut m = C::zero();
    for assignment in ColorAssignment::all(family) {
        let r = canonical_r(family, assignment, levels);
        let x = solve_x(&r);
        if !x.is_nonnegative() {
            return Err(Error::InfeasibleAssignment {
                assignment: assignment.describe(family),
                violations: x.negative_supports(),
            });
        }
        m = m.max(x.total());
        raw.push(x);
    }
    let empty = SubsetId::empty(n).expect("valid ground size");
    for x in &mut raw {
        let deficit = m - x.total();
        if !deficit.is_zero() {
            x.add(empty, deficit);
        }
    }
    SchemeTable::from_parts(
        family.clone(),
        m,
        levels.clone(),
        raw,
        Provenance::new(Construction::FromLevels),
    )
}

/// The improved construction: finds the smallest even pivot set outside
/// the family whose covered members span it, builds with the adjusted
/// levels, and lands one subpixel below the per-member block expansion.
/// Families whose members fit inside a proper sub-ground-set are first
/// projected there; the spare transparencies come back as all-white rows.
pub fn improved_scheme<C: CountScalar>(family: &SubsetFamily) -> Result<SchemeTable<C>> {
    let n = family.ground_size();
    if family.is_empty() {
        return Err(Error::NotApplicable {
            reason: "family carries no images".into(),
        });
    }
    let support = family.union_support();
    if support != SubsetId::full(n).expect("valid ground size") {
        let sub_family = family.restrict_to(support);
        let sub_table = improved_scheme::<C>(&sub_family)?;
        return lift_table(&sub_table, support, family);
    }

    let mut candidates: Vec<SubsetId> = (1..=full_mask(n))
        .map(|mask| SubsetId::new(mask as u32, n).expect("mask in range"))
        .filter(|t| t.len() % 2 == 0 && !family.contains(*t))
        .collect();
    candidates.sort_by_key(|t| (t.len(), t.mask()));

    for pivot in candidates {
        let covered = family
            .restrict_to(pivot)
            .union_support()
            .expand_within(pivot);
        if covered != pivot {
            continue;
        }
        let levels = improved_levels::<C>(family, pivot)?;
        let mut table = build_scheme(family, &levels)?;
        debug_assert!(
            table.expansion() < droste_expansion::<C>(family),
            "improved construction did not beat the block expansion"
        );
        table.provenance = Provenance::new(Construction::Improved { pivot });
        return Ok(table);
    }
    Err(Error::NotApplicable {
        reason: "no even subset outside the family is spanned by the members it contains".into(),
    })
}

/// Re-embeds a table built on the sub-ground-set `support` into the full
/// ground set; transparencies outside the support get all-white rows.
fn lift_table<C: CountScalar>(
    sub: &SchemeTable<C>,
    support: SubsetId,
    family: &SubsetFamily,
) -> Result<SchemeTable<C>> {
    let n = family.ground_size();
    // The restricted family lists members in the same canonical order, so
    // assignment bits carry over unchanged.
    debug_assert_eq!(sub.family().len(), family.len());
    let mut profiles = Vec::with_capacity(sub.profiles().len());
    for p in sub.profiles() {
        let mut lifted = PixelProfile::zero(n)?;
        for (support_sub, count) in p.nonzero() {
            lifted.set(support_sub.expand_within(support), count);
        }
        profiles.push(lifted);
    }
    let levels = Levels::from_fn(n, |s| {
        let v = s.intersection(support);
        if v.is_empty() {
            (C::zero(), C::zero())
        } else {
            sub.levels().get(v.compact_within(support))
        }
    })?;
    let provenance = Provenance {
        construction: match sub.provenance().construction {
            Construction::Improved { pivot } => Construction::Improved {
                pivot: pivot.expand_within(support),
            },
            c => c,
        },
        black_padding: sub.provenance().black_padding,
    };
    SchemeTable::from_parts(family.clone(), sub.expansion(), levels, profiles, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrast::lower_bound;
    use crate::verifier;

    fn s(elements: &[u32], n: u8) -> SubsetId {
        SubsetId::from_elements(elements, n).unwrap()
    }

    fn counts_of(p: &PixelProfile<i64>) -> Vec<i64> {
        p.iter().map(|(_, c)| c).collect()
    }

    #[test]
    fn kk_profiles_small() {
        let (white, black) = kk_threshold_profiles::<i64>(1).unwrap();
        assert_eq!(counts_of(&white), vec![1, 0]);
        assert_eq!(counts_of(&black), vec![0, 1]);

        let (white, black) = kk_threshold_profiles::<i64>(2).unwrap();
        assert_eq!(counts_of(&white), vec![1, 0, 0, 1]);
        assert_eq!(counts_of(&black), vec![0, 1, 1, 0]);

        let (white, black) = kk_threshold_profiles::<i64>(3).unwrap();
        assert_eq!(white.total(), 4);
        assert_eq!(black.total(), 4);
        let full = SubsetId::full(3).unwrap();
        assert_eq!(verifier::or_weight(&white, full), 3);
        assert_eq!(verifier::or_weight(&black, full), 4);
    }

    #[test]
    fn kk_profiles_hide_color_from_proper_subsets() {
        for k in 1..=5u8 {
            let (white, black) = kk_threshold_profiles::<i64>(k).unwrap();
            let full = SubsetId::full(k).unwrap();
            for rows_mask in 1..full_mask(k) {
                let rows = SubsetId::new(rows_mask as u32, k).unwrap();
                assert_eq!(
                    verifier::restrict_profile(&white, rows),
                    verifier::restrict_profile(&black, rows),
                    "k={k} rows={rows}"
                );
            }
            assert_eq!(
                verifier::or_weight(&white, full) + 1,
                verifier::or_weight(&black, full)
            );
        }
    }

    #[test]
    fn droste_full_family_n2() {
        let family = SubsetFamily::all_nonempty(2).unwrap();
        let table = droste_scheme::<i64>(&family).unwrap();
        assert_eq!(table.expansion(), 4);

        let all_white = ColorAssignment::EMPTY;
        let p = table.profile(all_white);
        // one column per support {2}, {1}, {1,2} plus one all-white column
        assert_eq!(counts_of(p), vec![1, 1, 1, 1]);
        let full = SubsetId::full(2).unwrap();
        assert_eq!(verifier::or_weight(p, full), 3);

        let all_black =
            ColorAssignment::from_black_members(&family, family.members().to_vec()).unwrap();
        assert_eq!(counts_of(table.profile(all_black)), vec![0, 1, 1, 2]);

        let top_black =
            ColorAssignment::from_black_members(&family, [s(&[1, 2], 2)]).unwrap();
        assert_eq!(counts_of(table.profile(top_black)), vec![0, 2, 2, 0]);
    }

    #[test]
    fn droste_expansions() {
        let table = droste_scheme::<i64>(&SubsetFamily::all_nonempty(3).unwrap()).unwrap();
        assert_eq!(table.expansion(), 13);
        assert_eq!(table.expansion(), lower_bound::<i64>(3).unwrap());

        let two = SubsetFamily::new(2, [s(&[1], 2), s(&[2], 2)]).unwrap();
        assert_eq!(droste_scheme::<i64>(&two).unwrap().expansion(), 2);
    }

    #[test]
    fn canonical_r_uses_levels_on_members() {
        let family = SubsetFamily::all_nonempty(2).unwrap();
        let levels = tight_levels(&DeltaSpec::ones_on(&family));
        let a = ColorAssignment::from_black_members(&family, [s(&[1], 2)]).unwrap();
        let r = canonical_r(&family, a, &levels);
        assert_eq!(r.get(s(&[1], 2)), 3);
        assert_eq!(r.get(s(&[2], 2)), 2);
        assert_eq!(r.get(s(&[1, 2], 2)), 3);
    }

    #[test]
    fn canonical_r_depends_only_on_colors_below() {
        // r_{1} must look identical whether or not the image on {2} is black.
        let family = SubsetFamily::new(2, [s(&[1], 2), s(&[2], 2)]).unwrap();
        let levels = improved_levels::<i64>(&family, s(&[1, 2], 2)).unwrap();
        let empty = canonical_r(&family, ColorAssignment::EMPTY, &levels);
        let two_black = canonical_r(
            &family,
            ColorAssignment::from_black_members(&family, [s(&[2], 2)]).unwrap(),
            &levels,
        );
        assert_eq!(empty.get(s(&[1], 2)), two_black.get(s(&[1], 2)));
    }

    #[test]
    fn build_scheme_full_family_n2() {
        let family = SubsetFamily::all_nonempty(2).unwrap();
        let levels = tight_levels(&DeltaSpec::ones_on(&family));
        let table = build_scheme(&family, &levels).unwrap();
        assert_eq!(table.expansion(), 4);

        let all = ColorAssignment::from_black_members(&family, family.members().to_vec()).unwrap();
        assert_eq!(counts_of(table.profile(all)), vec![0, 1, 1, 2]);
        assert_eq!(counts_of(table.profile(ColorAssignment::EMPTY)), vec![1, 1, 1, 1]);
        let top = ColorAssignment::from_black_members(&family, [s(&[1, 2], 2)]).unwrap();
        assert_eq!(counts_of(table.profile(top)), vec![0, 2, 2, 0]);
    }

    #[test]
    fn build_scheme_trivial_single_image() {
        let family = SubsetFamily::new(1, [s(&[1], 1)]).unwrap();
        let levels = Levels::from_pairs(1, vec![(1, 0)]).unwrap();
        let table = build_scheme(&family, &levels).unwrap();
        assert_eq!(table.expansion(), 1);
        assert_eq!(counts_of(table.profile(ColorAssignment::EMPTY)), vec![1, 0]);
        let black = ColorAssignment::from_bits(1, &family).unwrap();
        assert_eq!(counts_of(table.profile(black)), vec![0, 1]);
    }

    #[test]
    fn build_scheme_rejects_infeasible_levels() {
        let family = SubsetFamily::all_nonempty(2).unwrap();
        let levels = Levels::from_pairs(2, vec![(1, 0), (1, 0), (1, 0)]).unwrap();
        assert!(matches!(
            build_scheme(&family, &levels),
            Err(Error::InfeasibleLevels { .. })
        ));
    }

    #[test]
    fn improved_scheme_two_singletons_is_one_subpixel() {
        let family = SubsetFamily::new(2, [s(&[1], 2), s(&[2], 2)]).unwrap();
        let table = improved_scheme::<i64>(&family).unwrap();
        assert_eq!(table.expansion(), 1);
        assert!(matches!(
            table.provenance().construction,
            Construction::Improved { .. }
        ));
        // each transparency displays its own image verbatim
        let one_black = ColorAssignment::from_black_members(&family, [s(&[1], 2)]).unwrap();
        assert_eq!(counts_of(table.profile(one_black)), vec![0, 1, 0, 0]);
        let both = ColorAssignment::from_black_members(&family, family.members().to_vec()).unwrap();
        assert_eq!(counts_of(table.profile(both)), vec![0, 0, 0, 1]);
        assert_eq!(counts_of(table.profile(ColorAssignment::EMPTY)), vec![1, 0, 0, 0]);
    }

    #[test]
    fn improved_scheme_not_applicable_for_odd_top() {
        let family = SubsetFamily::all_but_top(3).unwrap();
        assert!(matches!(
            improved_scheme::<i64>(&family),
            Err(Error::NotApplicable { .. })
        ));
    }

    #[test]
    fn improved_scheme_beats_blocks_at_n4() {
        let family = SubsetFamily::all_but_top(4).unwrap();
        assert_eq!(droste_expansion::<i64>(&family), 40);
        let table = improved_scheme::<i64>(&family).unwrap();
        assert_eq!(table.expansion(), 39);
        let cert = verifier::certify(&table);
        assert!(cert.pass, "improved n=4 table must certify");
    }

    #[test]
    fn improved_scheme_projects_degenerate_families() {
        // All members live inside {1,2}; transparency 3 must come back as
        // an all-white row.
        let family = SubsetFamily::new(3, [s(&[1], 3), s(&[2], 3)]).unwrap();
        let table = improved_scheme::<i64>(&family).unwrap();
        assert_eq!(table.expansion(), 1);
        for p in table.profiles() {
            for (support, count) in p.nonzero() {
                assert!(
                    !support.contains_element(3) || count == 0,
                    "transparency 3 must stay white"
                );
            }
        }
        assert!(verifier::certify(&table).pass);
    }

    #[test]
    fn pad_black_shifts_levels() {
        let family = SubsetFamily::all_nonempty(2).unwrap();
        let table = droste_scheme::<i64>(&family).unwrap();
        let padded = table.pad_black(2).unwrap();
        assert_eq!(padded.expansion(), 6);
        assert_eq!(padded.levels().get(s(&[1], 2)), (5, 4));
        assert_eq!(padded.provenance().black_padding, 2);
        assert!(verifier::certify(&padded).pass);
    }

    #[test]
    fn droste_matches_tight_build_levels() {
        // The block construction and the solved tight-level build realize
        // the same per-image levels: exhaustive over families at n <= 3.
        for n in 1..=3u8 {
            let all = crate::lattice::nonempty_subsets(n).unwrap();
            for family_bits in 1u32..(1 << all.len()) {
                let family = SubsetFamily::new(
                    n,
                    all.iter()
                        .enumerate()
                        .filter(|(i, _)| family_bits & (1 << i) != 0)
                        .map(|(_, t)| *t),
                )
                .unwrap();
                let droste = droste_scheme::<i64>(&family).unwrap();
                let built =
                    build_scheme(&family, &tight_levels(&DeltaSpec::ones_on(&family))).unwrap();
                let droste_levels = verifier::measure_levels(&droste).unwrap();
                let built_levels = verifier::measure_levels(&built).unwrap();
                for member in family.members() {
                    assert_eq!(
                        droste_levels.get(*member),
                        built_levels.get(*member),
                        "family {family} member {member}"
                    );
                }
            }
        }
    }

    #[test]
    fn all_builders_certify_exhaustively_small() {
        for n in 1..=3u8 {
            let all = crate::lattice::nonempty_subsets(n).unwrap();
            for family_bits in 1u32..(1 << all.len()) {
                let family = SubsetFamily::new(
                    n,
                    all.iter()
                        .enumerate()
                        .filter(|(i, _)| family_bits & (1 << i) != 0)
                        .map(|(_, t)| *t),
                )
                .unwrap();
                let droste = droste_scheme::<i64>(&family).unwrap();
                assert!(verifier::certify(&droste).pass, "droste on {family}");
                let built =
                    build_scheme(&family, &tight_levels(&DeltaSpec::ones_on(&family))).unwrap();
                assert!(verifier::certify(&built).pass, "tight build on {family}");
                match improved_scheme::<i64>(&family) {
                    Ok(improved) => {
                        assert!(verifier::certify(&improved).pass, "improved on {family}");
                        assert!(
                            improved.expansion() < droste.expansion(),
                            "improved must beat blocks on {family}"
                        );
                    }
                    Err(Error::NotApplicable { .. }) => {}
                    Err(e) => panic!("improved_scheme failed on {family}: {e}"),
                }
            }
        }
    }
}
