//! The k = 3 per-class analysis: greedy choice of the pivot triple
//! {a, b, c}, the A/B/C/D partition with its two case-analysis lemmas
//! (|A|+|B| <= 2n-6 in six cases, |C|+|D| <= n-2 in four), the resulting
//! 3n-8 class bound, inductive extraction of a monochromatic disjoint pair,
//! and the counting bound N^(3) that demonstrates why the k = 2 counting
//! program does not carry over to k = 3.

use crate::error::{Error, Result};
use crate::numbering::Coloring;
use crate::oracle::{common_element, disjoint_pair, Alternative};
use crate::subsets::{binomial, KSubset};

fn intersection(family: &[KSubset]) -> Vec<u32> {
    match family.first() {
        None => Vec::new(),
        Some(first) => first
            .elements()
            .iter()
            .copied()
            .filter(|&x| family.iter().all(|s| s.contains(x)))
            .collect(),
    }
}

/// Greedy pivot choice: a maximizes membership count; b maximizes
/// membership-without-a among co-members of a; c maximizes
/// membership-without-a-and-b among third elements of members {a,b,*}.
/// Ties break toward the smallest element. The returned triple is a member
/// of S and induces |A| >= |B| >= |C|.
pub fn greedy_abc(s: &[KSubset]) -> Result<(u32, u32, u32)> {
    let first = s
        .first()
        .ok_or_else(|| Error::invalid("greedy_abc needs a nonempty family"))?;
    let n = first.n();
    if s.iter().any(|w| w.k() != 3 || w.n() != n) {
        return Err(Error::invalid("family must consist of 3-subsets of [n]"));
    }
    let count = |pred: &dyn Fn(&KSubset) -> bool| s.iter().filter(|w| pred(w)).count();

    let a = (1..=n)
        .max_by_key(|&x| (count(&|w| w.contains(x)), std::cmp::Reverse(x)))
        .expect("n >= 1");
    let b_candidates: Vec<u32> = (1..=n)
        .filter(|&x| x != a && s.iter().any(|w| w.contains(a) && w.contains(x)))
        .collect();
    let b = b_candidates
        .iter()
        .copied()
        .max_by_key(|&x| {
            (
                count(&|w| w.contains(x) && !w.contains(a)),
                std::cmp::Reverse(x),
            )
        })
        .ok_or_else(|| Error::invalid("no member of S contains a with a companion"))?;
    let c_candidates: Vec<u32> = (1..=n)
        .filter(|&x| {
            x != a
                && x != b
                && s.iter()
                    .any(|w| w.contains(a) && w.contains(b) && w.contains(x))
        })
        .collect();
    let c = c_candidates
        .iter()
        .copied()
        .max_by_key(|&x| {
            (
                count(&|w| w.contains(x) && !w.contains(a) && !w.contains(b)),
                std::cmp::Reverse(x),
            )
        })
        .ok_or_else(|| Error::invalid("no member of S of the form {a,b,*}"))?;
    Ok((a, b, c))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionOutcome {
    Partition {
        a_fam: Vec<KSubset>,
        b_fam: Vec<KSubset>,
        c_fam: Vec<KSubset>,
        d_fam: Vec<KSubset>,
    },
    /// A member missing all of a, b, c, paired with the pivot triple itself.
    DisjointWitness(KSubset, KSubset),
}

/// Split S along the pivot: A = {W: a in W, b not in W},
/// B = {W: a not in W, b in W}, C = {W: c in W, a,b not in W},
/// D = {W: a,b in W}. A member avoiding all three is disjoint from {a,b,c}
/// and is returned as a witness instead.
pub fn partition_abcd(s: &[KSubset], a: u32, b: u32, c: u32) -> Result<PartitionOutcome> {
    let n = s
        .first()
        .ok_or_else(|| Error::invalid("partition_abcd needs a nonempty family"))?
        .n();
    let pivot = KSubset::new(
        {
            let mut v = vec![a, b, c];
            v.sort_unstable();
            v
        },
        n,
    )?;
    if !s.contains(&pivot) {
        return Err(Error::invalid("{a,b,c} must be a member of S"));
    }
    let mut a_fam = Vec::new();
    let mut b_fam = Vec::new();
    let mut c_fam = Vec::new();
    let mut d_fam = Vec::new();
    for w in s {
        match (w.contains(a), w.contains(b), w.contains(c)) {
            (true, true, _) => d_fam.push(w.clone()),
            (true, false, _) => a_fam.push(w.clone()),
            (false, true, _) => b_fam.push(w.clone()),
            (false, false, true) => c_fam.push(w.clone()),
            (false, false, false) => {
                return Ok(PartitionOutcome::DisjointWitness(w.clone(), pivot))
            }
        }
    }
    Ok(PartitionOutcome::Partition {
        a_fam,
        b_fam,
        c_fam,
        d_fam,
    })
}

#[derive(Debug, Clone)]
pub struct ClassAnalysisK3 {
    pub n: u32,
    pub size: usize,
    pub alternative: Alternative,
    /// pivot and partition, populated on the Small path
    pub abc: Option<(u32, u32, u32)>,
    pub a_fam: Vec<KSubset>,
    pub b_fam: Vec<KSubset>,
    pub c_fam: Vec<KSubset>,
    pub d_fam: Vec<KSubset>,
    /// which case of the |A|+|B| analysis fired (1..=6)
    pub ab_case: Option<u8>,
    /// which case of the |C|+|D| analysis fired (1..=4)
    pub cd_case: Option<u8>,
    /// |A|+|B| <= 2n-6
    pub ab_bound_ok: Option<bool>,
    /// |C|+|D| <= n-2
    pub cd_bound_ok: Option<bool>,
}

fn classify_ab(b_fam: &[KSubset], b: u32) -> Result<u8> {
    if b_fam.is_empty() {
        return Ok(1);
    }
    for (i, w1) in b_fam.iter().enumerate() {
        for w2 in &b_fam[i + 1..] {
            let shared = w1.elements().iter().filter(|&&x| w2.contains(x)).count();
            if shared == 1 {
                // both contain b, so the single shared element is b
                return Ok(2);
            }
        }
    }
    match b_fam.len() {
        1 => Ok(3),
        2 => Ok(4),
        _ => {
            let inter = intersection(b_fam);
            match inter.len() {
                2 => Ok(5),
                1 if inter[0] == b => Ok(6),
                _ => Err(Error::Inconsistency(format!(
                    "B-family case analysis fell through: |B|={}, |inter|={}",
                    b_fam.len(),
                    inter.len()
                ))),
            }
        }
    }
}

fn classify_cd(c_fam: &[KSubset], c: u32) -> Result<u8> {
    match c_fam.len() {
        0 => Ok(1),
        1 => Ok(2),
        _ => {
            let inter = intersection(c_fam);
            match inter.len() {
                2 => Ok(3),
                1 if inter[0] == c => Ok(4),
                _ => Err(Error::Inconsistency(format!(
                    "C-family case analysis fell through: |C|={}, |inter|={}",
                    c_fam.len(),
                    inter.len()
                ))),
            }
        }
    }
}

/// Per-class trichotomy at k = 3: a disjoint pair, a common element, or
/// |S| <= 3n-8, the last established via the A/B/C/D partition bounds.
pub fn class_bound_k3(n: u32, s: &[KSubset]) -> Result<ClassAnalysisK3> {
    if n < 7 {
        return Err(Error::invalid("class_bound_k3 needs n >= 7"));
    }
    if s.iter().any(|w| w.k() != 3 || w.n() != n) {
        return Err(Error::invalid("family must consist of 3-subsets of [n]"));
    }
    let mut report = ClassAnalysisK3 {
        n,
        size: s.len(),
        alternative: Alternative::Small,
        abc: None,
        a_fam: Vec::new(),
        b_fam: Vec::new(),
        c_fam: Vec::new(),
        d_fam: Vec::new(),
        ab_case: None,
        cd_case: None,
        ab_bound_ok: None,
        cd_bound_ok: None,
    };
    if let Some((x, y)) = disjoint_pair(s) {
        report.alternative = Alternative::DisjointPair(x, y);
        return Ok(report);
    }
    if !s.is_empty() {
        if let Some(x) = common_element(s) {
            report.alternative = Alternative::CommonElement(x);
            return Ok(report);
        }
    }
    if s.is_empty() {
        return Ok(report);
    }
    let (a, b, c) = greedy_abc(s)?;
    let (a_fam, b_fam, c_fam, d_fam) = match partition_abcd(s, a, b, c)? {
        PartitionOutcome::Partition {
            a_fam,
            b_fam,
            c_fam,
            d_fam,
        } => (a_fam, b_fam, c_fam, d_fam),
        PartitionOutcome::DisjointWitness(..) => {
            return Err(Error::Inconsistency(
                "partition found a disjoint pair the direct scan missed".into(),
            ))
        }
    };
    if a_fam.len() < b_fam.len() || b_fam.len() < c_fam.len() {
        return Err(Error::Inconsistency(format!(
            "greedy pivot violated |A| >= |B| >= |C|: {} {} {}",
            a_fam.len(),
            b_fam.len(),
            c_fam.len()
        )));
    }
    let ab_case = classify_ab(&b_fam, b)?;
    let cd_case = classify_cd(&c_fam, c)?;
    let ab_ok = (a_fam.len() + b_fam.len()) as u64 <= 2 * n as u64 - 6;
    let cd_ok = (c_fam.len() + d_fam.len()) as u64 <= n as u64 - 2;
    if !(ab_ok && cd_ok) || s.len() as u64 > 3 * n as u64 - 8 {
        return Err(Error::Inconsistency(format!(
            "partition bounds failed on a class of {} sets (ab_case {}, cd_case {})",
            s.len(),
            ab_case,
            cd_case
        )));
    }
    report.abc = Some((a, b, c));
    report.a_fam = a_fam;
    report.b_fam = b_fam;
    report.c_fam = c_fam;
    report.d_fam = d_fam;
    report.ab_case = Some(ab_case);
    report.cd_case = Some(cd_case);
    report.ab_bound_ok = Some(ab_ok);
    report.cd_bound_ok = Some(cd_ok);
    Ok(report)
}

/// Inductive extraction of a monochromatic disjoint pair for a total
/// (n-5)-coloring of the 3-subsets: direct scan at n = 7; otherwise delete a
/// common element and its color, recurse on the (n-1)-instance, and lift the
/// witness back; if no class has a common element, some class exceeds 3n-8
/// and yields a disjoint pair via the partition analysis.
pub fn find_mono_disjoint_k3(coloring: &Coloring) -> Result<(KSubset, KSubset, u32)> {
    if coloring.k != 3 || coloring.n < 7 {
        return Err(Error::invalid("find_mono_disjoint_k3 needs k = 3, n >= 7"));
    }
    if coloring.colors != coloring.n - 5 {
        return Err(Error::invalid("find_mono_disjoint_k3 needs colors = n - 5"));
    }
    let sets = coloring.sets()?;
    let classes: Vec<Vec<KSubset>> = (1..=coloring.colors)
        .map(|l| coloring.class(&sets, l))
        .collect();
    let (a, b, color) = extract(coloring.n, &classes)?;
    // re-verify against the original coloring
    if !crate::oracle::verify_witness(coloring, &a, &b, color)? {
        return Err(Error::Inconsistency(
            "lifted witness failed re-verification".into(),
        ));
    }
    Ok((a, b, color))
}

fn extract(n: u32, classes: &[Vec<KSubset>]) -> Result<(KSubset, KSubset, u32)> {
    if n == 7 {
        for (i, class) in classes.iter().enumerate() {
            if let Some((a, b)) = disjoint_pair(class) {
                return Ok((a, b, i as u32 + 1));
            }
        }
        return Err(Error::Inconsistency(
            "base case n = 7 found no monochromatic disjoint pair".into(),
        ));
    }
    // a class with a common element lets us delete one element and one color
    let deletable = classes.iter().enumerate().find_map(|(i, class)| {
        if class.is_empty() {
            // nothing constrains the deleted element; pick n for determinism
            Some((i as u32 + 1, n))
        } else {
            common_element(class).map(|x| (i as u32 + 1, x))
        }
    });
    if let Some((color, x)) = deletable {
        let shrink = |e: u32| if e < x { e } else { e - 1 };
        let grow = |e: u32| if e < x { e } else { e + 1 };
        let mut sub_classes: Vec<Vec<KSubset>> = Vec::with_capacity(classes.len() - 1);
        for (i, class) in classes.iter().enumerate() {
            if i as u32 + 1 == color {
                continue;
            }
            sub_classes.push(
                class
                    .iter()
                    .filter(|w| !w.contains(x))
                    .map(|w| {
                        KSubset::new(w.elements().iter().map(|&e| shrink(e)).collect(), n - 1)
                    })
                    .collect::<Result<_>>()?,
            );
        }
        let (a, b, sub_color) = extract(n - 1, &sub_classes)?;
        let lift = |w: &KSubset| {
            KSubset::new(w.elements().iter().map(|&e| grow(e)).collect(), n)
        };
        let orig_color = if sub_color < color { sub_color } else { sub_color + 1 };
        return Ok((lift(&a)?, lift(&b)?, orig_color));
    }
    // no common element anywhere: some class must exceed 3n-8 and the
    // partition analysis turns it into a disjoint pair
    let (idx, class) = classes
        .iter()
        .enumerate()
        .max_by_key(|(_, c)| c.len())
        .expect("at least one color");
    if class.len() as u64 <= 3 * n as u64 - 8 {
        return Err(Error::Inconsistency(format!(
            "all classes small at n = {n}, which contradicts C(n,3) > (n-5)(3n-8)"
        )));
    }
    match class_bound_k3(n, class)?.alternative {
        Alternative::DisjointPair(a, b) => Ok((a, b, idx as u32 + 1)),
        other => Err(Error::Inconsistency(format!(
            "oversized class without common element reported {:?}",
            other.kind()
        ))),
    }
}

/// Which last summand the N^(3) bound uses: the definition's 3n-7 or the
/// class bound's 3n-8. The source argument states one but computes with the
/// other, so both are exposed; either way the bound fails to stay below
/// C(n,3) for n >= 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum N3Variant {
    DefSummand,   // 3n - 7
    BoundSummand, // 3n - 8
}

/// N^(3) = C(n-1,2) + ... + C(n-p,2) + (n-5-p) * summand.
pub fn n3_bound(n: u32, p: u32, variant: N3Variant) -> Result<u64> {
    if n < 7 || p > n - 5 {
        return Err(Error::invalid(format!(
            "n3_bound needs n >= 7 and 0 <= p <= n-5, got n={n} p={p}"
        )));
    }
    let n64 = n as u64;
    let summand = match variant {
        N3Variant::DefSummand => 3 * n64 - 7,
        N3Variant::BoundSummand => 3 * n64 - 8,
    };
    let sum: u64 = (1..=p as u64).map(|i| binomial(n64 - i, 2)).sum();
    Ok(sum + (n64 - 5 - p as u64) * summand)
}

/// Smallest p with N^(3) >= C(n,3), demonstrating the counting program's
/// failure; None when the bound stays below C(n,3) for every p.
pub fn n3_failure_witness(n: u32, variant: N3Variant) -> Result<Option<u32>> {
    for p in 0..=n - 5 {
        if n3_bound(n, p, variant)? >= binomial(n as u64, 3) {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbering::Domain;
    use crate::subsets::enum_ksubsets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triple(a: u32, b: u32, c: u32, n: u32) -> KSubset {
        let mut v = vec![a, b, c];
        v.sort_unstable();
        KSubset::new(v, n).unwrap()
    }

    #[test]
    fn greedy_star_picks_center() {
        let s: Vec<KSubset> = enum_ksubsets(7, 3)
            .unwrap()
            .into_iter()
            .filter(|w| w.contains(1))
            .collect();
        let (a, _, _) = greedy_abc(&s).unwrap();
        assert_eq!(a, 1);
    }

    #[test]
    fn greedy_singleton_family() {
        let s = vec![triple(1, 2, 3, 7)];
        assert_eq!(greedy_abc(&s).unwrap(), (1, 2, 3));
    }

    #[test]
    fn greedy_induces_sorted_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 7..=9u32 {
            let all = enum_ksubsets(n, 3).unwrap();
            for _ in 0..300 {
                let s: Vec<KSubset> = all
                    .iter()
                    .filter(|_| rng.random::<bool>())
                    .cloned()
                    .collect();
                let Ok((a, b, c)) = greedy_abc(&s) else {
                    continue; // empty or degenerate family
                };
                if let PartitionOutcome::Partition {
                    a_fam,
                    b_fam,
                    c_fam,
                    ..
                } = partition_abcd(&s, a, b, c).unwrap()
                {
                    assert!(a_fam.len() >= b_fam.len());
                    assert!(b_fam.len() >= c_fam.len());
                }
            }
        }
    }

    #[test]
    fn partition_example() {
        let s = vec![
            triple(1, 2, 3, 7),
            triple(1, 4, 5, 7),
            triple(2, 4, 6, 7),
        ];
        match partition_abcd(&s, 1, 2, 3).unwrap() {
            PartitionOutcome::Partition {
                a_fam,
                b_fam,
                c_fam,
                d_fam,
            } => {
                assert_eq!(a_fam, vec![triple(1, 4, 5, 7)]);
                assert_eq!(b_fam, vec![triple(2, 4, 6, 7)]);
                assert!(c_fam.is_empty());
                assert_eq!(d_fam, vec![triple(1, 2, 3, 7)]);
            }
            other => panic!("expected a partition, got {other:?}"),
        }
    }

    #[test]
    fn partition_disjoint_witness() {
        let s = vec![triple(1, 2, 3, 7), triple(4, 5, 6, 7)];
        match partition_abcd(&s, 1, 2, 3).unwrap() {
            PartitionOutcome::DisjointWitness(w, pivot) => {
                assert_eq!(w, triple(4, 5, 6, 7));
                assert_eq!(pivot, triple(1, 2, 3, 7));
                assert!(w.disjoint(&pivot));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn class_bound_star() {
        let s: Vec<KSubset> = enum_ksubsets(7, 3)
            .unwrap()
            .into_iter()
            .filter(|w| w.contains(1))
            .collect();
        assert_eq!(s.len(), 15); // C(6,2), above the 3n-8 = 13 bound
        let r = class_bound_k3(7, &s).unwrap();
        assert_eq!(r.alternative, Alternative::CommonElement(1));
    }

    #[test]
    fn class_bound_disjoint() {
        let s = vec![triple(1, 2, 3, 7), triple(4, 5, 6, 7)];
        let r = class_bound_k3(7, &s).unwrap();
        assert!(matches!(r.alternative, Alternative::DisjointPair(..)));
    }

    #[test]
    fn class_bound_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for n in 7..=9u32 {
            let all = enum_ksubsets(n, 3).unwrap();
            for _ in 0..500 {
                // biased sampling keeps families small enough to be
                // interesting (dense families almost surely hold disjoint pairs)
                let keep = rng.random_range(1..=4);
                let s: Vec<KSubset> = all
                    .iter()
                    .filter(|_| rng.random_range(0..10) < keep)
                    .cloned()
                    .collect();
                let r = class_bound_k3(n, &s).unwrap();
                match &r.alternative {
                    Alternative::DisjointPair(a, b) => {
                        assert!(a.disjoint(b) && s.contains(a) && s.contains(b))
                    }
                    Alternative::CommonElement(x) => {
                        assert!(!s.is_empty() && s.iter().all(|w| w.contains(*x)))
                    }
                    Alternative::Small => {
                        assert!(s.len() as u64 <= 3 * n as u64 - 8);
                        if !s.is_empty() {
                            assert!(r.ab_case.is_some() && r.cd_case.is_some());
                            assert_eq!(r.ab_bound_ok, Some(true));
                            assert_eq!(r.cd_bound_ok, Some(true));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extraction_base_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let c = Coloring::random(7, 3, 2, Domain::All, &mut rng).unwrap();
            let (a, b, color) = find_mono_disjoint_k3(&c).unwrap();
            assert!(crate::oracle::verify_witness(&c, &a, &b, color).unwrap());
        }
    }

    #[test]
    fn extraction_star_class_recurses() {
        // n = 8: all triples containing 1 get color 1; the rest are spread
        // over colors 2 and 3 by a fixed rule; extraction must delete
        // element 1 / color 1 and resolve at n = 7
        let sets = enum_ksubsets(8, 3).unwrap();
        let assignment: Vec<u32> = sets
            .iter()
            .map(|w| {
                if w.contains(1) {
                    1
                } else if w.contains(2) {
                    2
                } else {
                    3
                }
            })
            .collect();
        let c = Coloring::new(8, 3, 3, Domain::All, assignment).unwrap();
        let (a, b, color) = find_mono_disjoint_k3(&c).unwrap();
        assert!(crate::oracle::verify_witness(&c, &a, &b, color).unwrap());
        assert_ne!(color, 1, "the star class cannot hold a disjoint pair");
    }

    #[test]
    fn extraction_random_colorings() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for n in 7..=10u32 {
            for _ in 0..50 {
                let c = Coloring::random(n, 3, n - 5, Domain::All, &mut rng).unwrap();
                let (a, b, color) = find_mono_disjoint_k3(&c).unwrap();
                assert!(crate::oracle::verify_witness(&c, &a, &b, color).unwrap());
            }
        }
    }

    #[test]
    fn n3_bound_examples() {
        assert_eq!(n3_bound(10, 0, N3Variant::BoundSummand).unwrap(), 110);
        assert!(110 < binomial(10, 3));
        assert_eq!(n3_bound(10, 4, N3Variant::BoundSummand).unwrap(), 122);
        assert_eq!(n3_bound(10, 4, N3Variant::DefSummand).unwrap(), 123);
        assert!(122 > binomial(10, 3));
        assert!(n3_bound(10, 6, N3Variant::DefSummand).is_err());
    }

    #[test]
    fn n3_failure_everywhere_from_ten() {
        for n in 10..=20u32 {
            for variant in [N3Variant::DefSummand, N3Variant::BoundSummand] {
                assert!(
                    n3_failure_witness(n, variant).unwrap().is_some(),
                    "no failing p at n={n} for {variant:?}"
                );
            }
        }
    }
}
