//! The self-similar measure `P = Σ p_j P∘S_j⁻¹` on `[0, 1]` with
//! `p_1 = 1/4`, `p_j = 3/2^(j+1)` for `j ≥ 2` and `S_j(x) = x/2^(j+1) + 1 − 1/2^(j−1)`.
//!
//! Everything here is exact. Regions are either a cylinder `J_ω` (`Closed`) or the
//! union of the later siblings of `J_ω` (`Tail`), which is the shape of every
//! Voronoi cell of an optimal quantizer for this measure.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, inv_pow2, ratio, Rational};
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Closed,
    Tail,
}

/// `Closed(ω)` is the cylinder `J_ω`; `Tail(ω)` is `⋃_{j≥1} J_{ω⁻(ω_last + j)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub kind: RegionKind,
    pub word: Word,
}

impl Region {
    pub fn closed(word: Word) -> Self {
        Region {
            kind: RegionKind::Closed,
            word,
        }
    }

    pub fn tail(word: Word) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::EmptyTail);
        }
        Ok(Region {
            kind: RegionKind::Tail,
            word,
        })
    }

    /// Whole support `[0, 1]`.
    pub fn root() -> Self {
        Region::closed(Word::empty())
    }

    fn check(&self) -> Result<()> {
        if self.kind == RegionKind::Tail && self.word.is_empty() {
            return Err(Error::EmptyTail);
        }
        Ok(())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RegionKind::Closed => write!(f, "a({})", self.word),
            RegionKind::Tail => write!(f, "a({}, inf)", self.word),
        }
    }
}

/// Literal constants of the measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureConstants {
    pub mean: Rational,
    pub variance: Rational,
    /// Tail error factor when the last letter is 1.
    pub tail_factor_last1: Rational,
    /// Tail error factor when the last letter is at least 2.
    pub tail_factor_other: Rational,
    /// Offset of the tail centroid over the first sibling's centroid, in units of its ratio.
    pub tail_offset: Rational,
}

impl MeasureConstants {
    fn literal() -> Self {
        MeasureConstants {
            mean: ratio(4, 7),
            variance: ratio(288, 3577),
            tail_factor_last1: ratio(43, 3),
            tail_factor_other: ratio(43, 9),
            tail_offset: ratio(8, 7),
        }
    }

    /// Checks the literals against the fixed-point equations of the first two
    /// moments and against partial sums of the tail error series.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let m = &self.mean;
        if *m != m / Rational::from_integer(16.into()) * Rational::from_integer(2.into()) + ratio(1, 2) {
            return Err(format!("mean {m} is not a fixed point"));
        }
        let second = &self.variance + m * m;
        if second != &second * ratio(5, 224) + ratio(39, 98) {
            return Err(format!("second moment {second} is not a fixed point"));
        }
        // Total expectation over J_1 and the tail after it.
        let one = Word::letter(1).unwrap();
        let two = Word::letter(2).unwrap();
        let tail_mean = apply_map(&two, m) + &self.tail_offset * scale_word(&two);
        if ratio(1, 4) * apply_map(&one, m) + ratio(3, 4) * tail_mean != *m {
            return Err(format!("tail offset {} breaks total expectation", self.tail_offset));
        }
        for (w, factor) in [(one, &self.tail_factor_last1), (two, &self.tail_factor_other)] {
            let unit = closed_error_unit(&w) * &self.variance;
            let partial = tail_error_series_with(&w, 60, self).map_err(|e| e.to_string())?;
            let full = factor * &unit;
            if partial > full || (&full - &partial) * (BigInt::one() << 40u32) > full {
                return Err(format!("tail factor {factor} disagrees with the series"));
            }
        }
        Ok(())
    }
}

/// The measure's constants, validated once in debug builds.
pub fn constants() -> &'static MeasureConstants {
    static CONSTANTS: OnceLock<MeasureConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| {
        let c = MeasureConstants::literal();
        if cfg!(debug_assertions) {
            if let Err(e) = c.validate() {
                panic!("measure constants failed validation: {e}");
            }
        }
        c
    })
}

pub fn prob_letter(j: u64) -> Result<Rational> {
    match j {
        0 => Err(Error::LetterOutOfRange(0)),
        1 => Ok(ratio(1, 4)),
        _ => Ok(inv_pow2(j + 1) * Rational::from_integer(3.into())),
    }
}

/// `p_ω`, the product of the letter probabilities.
pub fn prob_word(w: &Word) -> Rational {
    w.letters()
        .iter()
        .map(|&j| prob_letter(j).expect("word letters are >= 1"))
        .fold(Rational::one(), |acc, p| acc * p)
}

/// `s_ω = 1/2^(Σω_i + |ω|)`.
pub fn scale_word(w: &Word) -> Rational {
    inv_pow2(w.weight())
}

/// `p_ω · s_ω² = 3^c(ω) / 2^(3·weight)`, the common factor of every node error.
pub(crate) fn closed_error_unit(w: &Word) -> Rational {
    let num = num_traits::pow(BigInt::from(3), w.count_non_ones());
    Rational::new(num, BigInt::one() << (3 * w.weight()))
}

/// `S_ω(x)`.
pub fn apply_map(w: &Word, x: &Rational) -> Rational {
    let mut x = x.clone();
    for &j in w.letters().iter().rev() {
        x = x * inv_pow2(j + 1) + (Rational::one() - shift(j));
    }
    x
}

/// `S_ω(0)` as a single dyadic fraction over `2^weight(ω)`.
pub(crate) fn map_origin(w: &Word) -> Rational {
    let total = w.weight();
    let mut num = BigInt::zero();
    let mut prefix = 0u64;
    for &j in w.letters() {
        // s_{ω_1..ω_(i-1)} · (1 − 1/2^(j−1))
        let gap = (BigInt::one() << (j - 1)) - 1;
        num += gap << (total - prefix - j + 1);
        prefix += j + 1;
    }
    Rational::new(num, BigInt::one() << total)
}

/// `1/2^(j−1)`, the gap between `S_j(0)` and 1.
fn shift(j: u64) -> Rational {
    if j == 1 {
        Rational::one()
    } else {
        inv_pow2(j - 1)
    }
}

pub fn region_interval(r: &Region) -> Result<(Rational, Rational)> {
    r.check()?;
    match r.kind {
        RegionKind::Closed => {
            let lo = map_origin(&r.word);
            let hi = &lo + scale_word(&r.word);
            Ok((lo, hi))
        }
        RegionKind::Tail => {
            let parent = r.word.parent()?;
            let lo = map_origin(&r.word.successor()?);
            let hi = map_origin(&parent) + scale_word(&parent);
            Ok((lo, hi))
        }
    }
}

pub fn region_mass(r: &Region) -> Result<Rational> {
    r.check()?;
    match r.kind {
        RegionKind::Closed => Ok(prob_word(&r.word)),
        // Σ_j p_{ω⁻(ω_last + j)}: the siblings halve geometrically from p_ω/2, or from 3p_ω/2
        // when the last letter is 1.
        RegionKind::Tail if r.word.last() == Some(1) => Ok(prob_word(&r.word) * Rational::from_integer(3.into())),
        RegionKind::Tail => Ok(prob_word(&r.word)),
    }
}

pub fn centroid(r: &Region) -> Result<Rational> {
    r.check()?;
    let c = constants();
    match r.kind {
        RegionKind::Closed => Ok(map_origin(&r.word) + scale_word(&r.word) * &c.mean),
        RegionKind::Tail => {
            let next = r.word.successor()?;
            Ok(map_origin(&next) + scale_word(&next) * (&c.mean + &c.tail_offset))
        }
    }
}

/// `E(X | X ∈ J_k ∪ J_{k+1} ∪ ...) = 1 − (8/7)/2^k`.
pub fn tail_conditional_mean(k: u64) -> Result<Rational> {
    if k < 2 {
        return Err(Error::TailIndex(k));
    }
    Ok(Rational::one() - ratio(8, 7) * inv_pow2(k))
}

/// Rejects any pair of regions whose interiors intersect. Touching endpoints are allowed.
pub fn check_disjoint<'a, I>(regions: I) -> Result<()>
where
    I: IntoIterator<Item = &'a Region>,
{
    let mut spans = regions
        .into_iter()
        .map(|r| region_interval(r).map(|iv| (iv, r)))
        .collect::<Result<Vec<_>>>()?;
    spans.sort_by(|a, b| a.0 .0.cmp(&b.0 .0));
    for pair in spans.windows(2) {
        let ((_, left_hi), left) = &pair[0];
        let ((right_lo, _), right) = &pair[1];
        if right_lo < left_hi {
            return Err(Error::Overlap {
                first: left.to_string(),
                second: right.to_string(),
            });
        }
    }
    Ok(())
}

/// Conditional expectation of `X` given that it falls in the union of `regions`.
pub fn centroid_union(regions: &[Region]) -> Result<Rational> {
    if regions.is_empty() {
        return Err(Error::EmptyRegionList);
    }
    check_disjoint(regions)?;
    let mut mass = Rational::zero();
    let mut moment = Rational::zero();
    for r in regions {
        let m = region_mass(r)?;
        moment += &m * centroid(r)?;
        mass += m;
    }
    Ok(moment / mass)
}

/// Distortion of a region about its own centroid.
pub fn node_error(r: &Region) -> Result<Rational> {
    r.check()?;
    let c = constants();
    let base = closed_error_unit(&r.word) * &c.variance;
    Ok(match r.kind {
        RegionKind::Closed => base,
        RegionKind::Tail if r.word.last() == Some(1) => base * &c.tail_factor_last1,
        RegionKind::Tail => base * &c.tail_factor_other,
    })
}

/// Partial sum of the sibling-by-sibling expansion of the tail error. Converges from
/// below to `node_error(Tail(w))`.
pub fn tail_error_series(w: &Word, terms: usize) -> Result<Rational> {
    tail_error_series_with(w, terms, constants())
}

fn tail_error_series_with(w: &Word, terms: usize, c: &MeasureConstants) -> Result<Rational> {
    if w.is_empty() {
        return Err(Error::EmptyTail);
    }
    // siblings share the prefix map S_{ω⁻}, which scales every squared distance
    // by s_{ω⁻}²; sum in the coordinates of the last letter
    let prefix = w.parent()?;
    let first = w.last().unwrap() + 1;
    let start = Word::letter(first)?;
    let center = apply_map(&start, &c.mean) + &c.tail_offset * scale_word(&start);
    // For a letter j ≥ 2 put x = 2^-(j+1): p_j = 3x, s_j = x and
    // S_j(mean) − center = x·(a + b/x) with a = mean − 4, b = 1 − center, so the
    // term is 3(V + a²)x³ + 6ab·x² + 3b²·x. Sum each power of x as a dyadic.
    let a = &c.mean - int(4);
    let b = Rational::one() - &center;
    let last = first + terms as u64 - 1;
    let geometric = |k: u64| -> Rational {
        let mut num = BigInt::zero();
        for j in first..=last {
            num += BigInt::one() << (k * (last - j));
        }
        Rational::new(num, BigInt::one() << (k * (last + 1)))
    };
    let three = int(3);
    let sum = &three * (&c.variance + &a * &a) * geometric(3)
        + int(6) * &a * &b * geometric(2)
        + three * &b * &b * geometric(1);
    let s_prefix = scale_word(&prefix);
    Ok(prob_word(&prefix) * &s_prefix * &s_prefix * sum)
}

/// `∫_region (x − x0)² dP`.
pub fn distortion(r: &Region, x0: &Rational) -> Result<Rational> {
    r.check()?;
    match r.kind {
        RegionKind::Closed => {
            let c = constants();
            let s = scale_word(&r.word);
            let d = apply_map(&r.word, &c.mean) - x0;
            Ok(prob_word(&r.word) * (&s * &s * &c.variance + &d * &d))
        }
        RegionKind::Tail => {
            let d = centroid(r)? - x0;
            Ok(node_error(r)? + region_mass(r)? * &d * &d)
        }
    }
}

pub fn distortion_union(pairs: &[(Region, Rational)]) -> Result<Rational> {
    check_disjoint(pairs.iter().map(|(r, _)| r))?;
    pairs
        .iter()
        .try_fold(Rational::zero(), |acc, (r, x0)| Ok(acc + distortion(r, x0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::word;
    use proptest::prelude::*;

    fn closed(w: Word) -> Region {
        Region::closed(w)
    }

    fn tail(w: Word) -> Region {
        Region::tail(w).unwrap()
    }

    #[test]
    fn constants_validate() {
        MeasureConstants::literal().validate().unwrap();
        let mut broken = MeasureConstants::literal();
        broken.variance = ratio(288, 3578);
        assert!(broken.validate().is_err());
        let mut broken = MeasureConstants::literal();
        broken.tail_factor_other = ratio(43, 8);
        assert!(broken.validate().is_err());
    }

    #[test]
    fn letter_probabilities() {
        assert_eq!(prob_letter(1).unwrap(), ratio(1, 4));
        assert_eq!(prob_letter(2).unwrap(), ratio(3, 8));
        assert_eq!(prob_letter(5).unwrap(), ratio(3, 64));
        assert!(prob_letter(0).is_err());
    }

    #[test]
    fn word_probabilities_and_scales() {
        assert_eq!(prob_word(&word![1]), ratio(1, 4));
        assert_eq!(prob_word(&word![2, 1]), ratio(3, 32));
        assert_eq!(prob_word(&Word::empty()), int(1));
        assert_eq!(scale_word(&word![1]), ratio(1, 4));
        assert_eq!(scale_word(&word![2, 1]), ratio(1, 32));
        assert_eq!(scale_word(&Word::empty()), int(1));
    }

    #[test]
    fn maps() {
        assert_eq!(apply_map(&word![2], &int(0)), ratio(1, 2));
        assert_eq!(apply_map(&word![2], &int(1)), ratio(5, 8));
        assert_eq!(apply_map(&word![1], &ratio(4, 7)), ratio(1, 7));
        assert_eq!(apply_map(&Word::empty(), &ratio(4, 7)), ratio(4, 7));
    }

    #[test]
    fn intervals() {
        assert_eq!(region_interval(&closed(word![2])).unwrap(), (ratio(1, 2), ratio(5, 8)));
        assert_eq!(region_interval(&tail(word![1])).unwrap(), (ratio(1, 2), int(1)));
        assert_eq!(
            region_interval(&tail(word![2, 1])).unwrap(),
            (ratio(9, 16), ratio(5, 8))
        );
        let bad = Region {
            kind: RegionKind::Tail,
            word: Word::empty(),
        };
        assert_eq!(region_interval(&bad), Err(Error::EmptyTail));
        assert_eq!(region_mass(&bad), Err(Error::EmptyTail));
        assert_eq!(centroid(&bad), Err(Error::EmptyTail));
        assert_eq!(node_error(&bad), Err(Error::EmptyTail));
        assert_eq!(distortion(&bad, &int(0)), Err(Error::EmptyTail));
        assert!(Region::tail(Word::empty()).is_err());
    }

    #[test]
    fn masses() {
        assert_eq!(region_mass(&tail(word![1])).unwrap(), ratio(3, 4));
        assert_eq!(region_mass(&tail(word![2])).unwrap(), ratio(3, 8));
        assert_eq!(region_mass(&closed(word![2, 1])).unwrap(), ratio(3, 32));
    }

    #[test]
    fn centroids() {
        assert_eq!(centroid(&closed(word![1])).unwrap(), ratio(1, 7));
        assert_eq!(centroid(&tail(word![1])).unwrap(), ratio(5, 7));
        assert_eq!(centroid(&tail(word![2])).unwrap(), ratio(6, 7));
        assert_eq!(centroid(&closed(word![1, 1])).unwrap(), ratio(1, 28));
        assert_eq!(centroid(&tail(word![1, 1])).unwrap(), ratio(5, 28));
    }

    #[test]
    fn tail_means() {
        assert_eq!(tail_conditional_mean(2).unwrap(), ratio(5, 7));
        assert_eq!(tail_conditional_mean(3).unwrap(), ratio(6, 7));
        assert_eq!(tail_conditional_mean(10).unwrap(), ratio(895, 896));
        assert_eq!(tail_conditional_mean(1), Err(Error::TailIndex(1)));
        for k in 1..=30u64 {
            assert_eq!(
                tail_conditional_mean(k + 1).unwrap(),
                centroid(&tail(Word::letter(k).unwrap())).unwrap()
            );
        }
    }

    #[test]
    fn union_centroids() {
        assert_eq!(
            centroid_union(&[closed(word![2, 1]), closed(word![2, 2])]).unwrap(),
            ratio(11, 20)
        );
        assert_eq!(
            centroid_union(&[closed(word![1]), closed(word![2, 1, 1])]).unwrap(),
            ratio(1363, 7840)
        );
        assert_eq!(
            centroid_union(&[tail(word![2, 1, 1]), tail(word![2, 1]), tail(word![2])]).unwrap(),
            ratio(5007, 6944)
        );
        assert_eq!(centroid_union(&[]), Err(Error::EmptyRegionList));
        assert!(matches!(
            centroid_union(&[closed(word![2]), closed(word![2, 1])]),
            Err(Error::Overlap { .. })
        ));
        assert!(matches!(
            centroid_union(&[tail(word![1]), closed(word![3])]),
            Err(Error::Overlap { .. })
        ));
    }

    #[test]
    fn node_errors() {
        assert_eq!(node_error(&closed(word![1])).unwrap(), ratio(9, 7154));
        assert_eq!(node_error(&closed(word![2])).unwrap(), ratio(27, 57232));
        assert_eq!(node_error(&tail(word![1])).unwrap(), ratio(129, 7154));
        assert_eq!(node_error(&Region::root()).unwrap(), ratio(288, 3577));
        assert_eq!(
            node_error(&closed(word![1])).unwrap() + node_error(&tail(word![1])).unwrap(),
            ratio(69, 3577)
        );
        // E(a(11,∞)) = E(a(3,∞)) = 43V/12288
        let tie = ratio(43, 12288) * ratio(288, 3577);
        assert_eq!(node_error(&tail(word![1, 1])).unwrap(), tie);
        assert_eq!(node_error(&tail(word![3])).unwrap(), tie);
    }

    #[test]
    fn series_matches_closed_form() {
        let two_50 = Rational::from_integer(BigInt::one() << 50u32);
        for w in [word![2], word![3]] {
            let exact = node_error(&tail(w.clone())).unwrap();
            let partial = tail_error_series(&w, 60).unwrap();
            assert!(partial < exact);
            assert!((&exact - &partial) * &two_50 < int(1));
        }
        let w = word![3];
        assert_eq!(
            node_error(&tail(w.clone())).unwrap(),
            ratio(43, 9) * prob_word(&w) * scale_word(&w) * scale_word(&w) * ratio(288, 3577)
        );
        assert!(tail_error_series(&word![1], 1).unwrap() < node_error(&tail(word![1])).unwrap());
        assert_eq!(tail_error_series(&Word::empty(), 3), Err(Error::EmptyTail));
    }

    #[test]
    fn distortions() {
        assert_eq!(
            distortion(&closed(word![1]), &ratio(7, 16)).unwrap(),
            ratio(12015, 523264)
        );
        assert_eq!(distortion(&closed(word![2]), &ratio(5, 8)).unwrap(), ratio(405, 261632));
        assert_eq!(distortion(&tail(word![1]), &ratio(5, 7)).unwrap(), ratio(129, 7154));
    }

    #[test]
    fn union_distortions() {
        let pairs = [
            (closed(word![2, 1]), ratio(11, 20)),
            (closed(word![2, 2]), ratio(11, 20)),
            (tail(word![2, 2]), ratio(5, 8)),
        ];
        assert_eq!(distortion_union(&pairs).unwrap(), ratio(2403, 10465280));
        let pairs = [(closed(word![1]), ratio(1, 7)), (tail(word![1]), ratio(5, 7))];
        assert_eq!(distortion_union(&pairs).unwrap(), ratio(69, 3577));
        assert_eq!(distortion_union(&[]).unwrap(), int(0));
        let overlapping = [(closed(word![2]), int(0)), (closed(word![2, 5]), int(0))];
        assert!(distortion_union(&overlapping).is_err());
    }

    #[test]
    fn tail_distortion_matches_series_expansion() {
        // The bias-variance form against a direct sum over siblings, at an off-center point.
        let w = word![2, 1];
        let x0 = ratio(3, 5);
        let mut sibling = w.successor().unwrap();
        let mut sum = Rational::zero();
        for _ in 0..80 {
            sum += distortion(&closed(sibling.clone()), &x0).unwrap();
            sibling = sibling.successor().unwrap();
        }
        let exact = distortion(&tail(w), &x0).unwrap();
        assert!(sum < exact);
        assert!((exact - sum) * Rational::from_integer(BigInt::one() << 60u32) < int(1));
    }

    fn any_word() -> impl Strategy<Value = Word> {
        prop::collection::vec(1u64..=12, 1..=8).prop_map(|v| Word::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn prob_closed_form(w in prop::collection::vec(1u64..=40, 0..=12)) {
            let w = Word::new(w).unwrap();
            let closed_form = Rational::new(
                num_traits::pow(BigInt::from(3), w.count_non_ones()),
                BigInt::one() << w.weight(),
            );
            prop_assert_eq!(prob_word(&w), closed_form);
        }

        #[test]
        fn origin_matches_composition(w in prop::collection::vec(1u64..=40, 0..=12), num in 0i64..=7) {
            let w = Word::new(w).unwrap();
            let x = ratio(num, 7);
            prop_assert_eq!(map_origin(&w) + scale_word(&w) * &x, apply_map(&w, &x));
        }

        #[test]
        fn tail_mass_is_sibling_sum(w in any_word()) {
            let r = tail(w.clone());
            let mass = region_mass(&r).unwrap();
            let mut sibling = w.successor().unwrap();
            let mut partial = Rational::zero();
            for _ in 0..64 {
                partial += prob_word(&sibling);
                sibling = sibling.successor().unwrap();
            }
            // remainder after 64 siblings is mass / 2^64
            prop_assert_eq!(&mass - &partial, &mass * inv_pow2(64));
        }

        #[test]
        fn partition_of_unity(k in 1u64..=60) {
            let mut total = region_mass(&tail(Word::letter(k).unwrap())).unwrap();
            for j in 1..=k {
                total += prob_word(&Word::letter(j).unwrap());
            }
            prop_assert_eq!(total, int(1));
        }

        #[test]
        fn distortion_minimized_at_centroid(w in any_word(), tail_kind in any::<bool>(), num in -50i64..150, den in 1i64..100) {
            let r = if tail_kind { tail(w) } else { closed(w) };
            let x0 = ratio(num, den);
            let d = distortion(&r, &x0).unwrap();
            let e = node_error(&r).unwrap();
            let c = centroid(&r).unwrap();
            prop_assert!(d >= e);
            prop_assert_eq!(d == e, x0 == c);
            prop_assert_eq!(distortion(&r, &c).unwrap(), e);
        }

        #[test]
        fn centroid_inside_region(w in any_word(), tail_kind in any::<bool>()) {
            let r = if tail_kind { tail(w) } else { closed(w) };
            let (lo, hi) = region_interval(&r).unwrap();
            let c = centroid(&r).unwrap();
            prop_assert!(lo < c && c < hi);
            prop_assert!(region_mass(&r).unwrap() > Rational::zero());
        }

        #[test]
        fn series_nondecreasing_and_bounded(w in any_word()) {
            let exact = node_error(&tail(w.clone())).unwrap();
            let mut prev = Rational::zero();
            for m in [1usize, 2, 5, 20, 60] {
                let s = tail_error_series(&w, m).unwrap();
                prop_assert!(s >= prev);
                prop_assert!(s <= exact);
                prev = s;
            }
            prop_assert!((&exact - &prev) * Rational::from_integer(BigInt::one() << 40u32) < exact);
        }
    }
}
