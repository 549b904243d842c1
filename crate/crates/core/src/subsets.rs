//! Ground-set combinatorics: k-subsets of [n] in colexicographic order,
//! ranking/unranking, cyclic stability, and small helpers shared by the
//! formula generators.

use crate::error::{Error, Result};

/// Binomial coefficient C(n, k), exact in u64 for the ranges used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

/// A k-element subset of [1, n], stored strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSubset {
    elements: Vec<u32>,
    n: u32,
}

impl KSubset {
    pub fn new(elements: Vec<u32>, n: u32) -> Result<Self> {
        let k = elements.len() as u32;
        if k < 1 {
            return Err(Error::invalid("subset must be nonempty"));
        }
        if n < 2 * k {
            return Err(Error::invalid(format!("need n >= 2k, got n={n} k={k}")));
        }
        for w in elements.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::invalid("elements must be strictly increasing"));
            }
        }
        if elements[0] < 1 || *elements.last().unwrap() > n {
            return Err(Error::invalid(format!("elements must lie in [1, {n}]")));
        }
        Ok(KSubset { elements, n })
    }

    /// Construction without the n >= 2k guard, for intermediate sets
    /// (e.g. the (k+1)-subsets handled during substitution image checks).
    pub fn new_unguarded(elements: Vec<u32>, n: u32) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("subset must be nonempty"));
        }
        for w in elements.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::invalid("elements must be strictly increasing"));
            }
        }
        if elements[0] < 1 || *elements.last().unwrap() > n {
            return Err(Error::invalid(format!("elements must lie in [1, {n}]")));
        }
        Ok(KSubset { elements, n })
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.elements.len() as u32
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// The k smallest elements ("firsts").
    pub fn firsts(&self, k: usize) -> KSubset {
        assert!(k >= 1 && k <= self.elements.len());
        KSubset {
            elements: self.elements[..k].to_vec(),
            n: self.n,
        }
    }

    pub fn disjoint(&self, other: &KSubset) -> bool {
        // both sorted; merge scan
        let (a, b) = (&self.elements, &other.elements);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Cyclic stability: no i with both i and i+1 (mod n) in the set,
    /// including the wraparound pair {n, 1}.
    pub fn is_stable(&self) -> bool {
        let e = &self.elements;
        for w in e.windows(2) {
            if w[1] == w[0] + 1 {
                return false;
            }
        }
        if e.len() >= 2 && e[0] == 1 && *e.last().unwrap() == self.n {
            return false;
        }
        // singleton {x}: stable unless n == 1 (cannot happen, n >= 2k >= 2)
        true
    }

    /// 0-based colexicographic rank: sum of C(a_i - 1, i) over positions i = 1..k.
    pub fn colex_rank(&self) -> u64 {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, &a)| binomial((a - 1) as u64, (i + 1) as u64))
            .sum()
    }
}

fn check_params(n: u32, k: u32) -> Result<()> {
    if k < 1 || n < 2 * k {
        return Err(Error::invalid(format!(
            "need 1 <= k and 2k <= n, got n={n} k={k}"
        )));
    }
    Ok(())
}

/// All C(n,k) subsets in colex order; position equals colex rank.
pub fn enum_ksubsets(n: u32, k: u32) -> Result<Vec<KSubset>> {
    check_params(n, k)?;
    let mut out = Vec::with_capacity(binomial(n as u64, k as u64) as usize);
    let mut cur: Vec<u32> = (1..=k).collect();
    loop {
        out.push(KSubset {
            elements: cur.clone(),
            n,
        });
        // next in colex: increment the lowest position that can move without
        // passing the element above it
        let k = k as usize;
        let mut i = 0;
        while i < k {
            let cap = if i + 1 < k { cur[i + 1] - 1 } else { n };
            if cur[i] < cap {
                cur[i] += 1;
                for (j, slot) in cur.iter_mut().enumerate().take(i) {
                    *slot = (j + 1) as u32;
                }
                break;
            }
            i += 1;
        }
        if i == k {
            return Ok(out);
        }
    }
}

/// Colex-ordered subsequence of enum_ksubsets containing exactly the stable sets.
pub fn enum_stable(n: u32, k: u32) -> Result<Vec<KSubset>> {
    Ok(enum_ksubsets(n, k)?
        .into_iter()
        .filter(|s| s.is_stable())
        .collect())
}

pub fn colex_unrank(mut r: u64, n: u32, k: u32) -> Result<KSubset> {
    check_params(n, k)?;
    if r >= binomial(n as u64, k as u64) {
        return Err(Error::invalid(format!(
            "rank {r} out of range for C({n},{k})"
        )));
    }
    let mut elements = vec![0u32; k as usize];
    let mut hi = n;
    for i in (1..=k).rev() {
        // largest a with C(a-1, i) <= r
        let mut a = hi;
        while binomial((a - 1) as u64, i as u64) > r {
            a -= 1;
        }
        r -= binomial((a - 1) as u64, i as u64);
        elements[(i - 1) as usize] = a;
        hi = a - 1;
    }
    Ok(KSubset { elements, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factorial(x: u64) -> u64 {
        (1..=x).product::<u64>().max(1)
    }

    // independent oracle for |enum_ksubsets|
    fn binom_by_factorials(n: u64, k: u64) -> u64 {
        factorial(n) / (factorial(k) * factorial(n - k))
    }

    #[test]
    fn enum_singletons() {
        let s = enum_ksubsets(3, 1).unwrap();
        let got: Vec<_> = s.iter().map(|x| x.elements().to_vec()).collect();
        assert_eq!(got, vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn enum_5_2_ends() {
        let s = enum_ksubsets(5, 2).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s[0].elements(), &[1, 2]);
        assert_eq!(s[9].elements(), &[4, 5]);
    }

    #[test]
    fn colex_position_of_13() {
        let s = enum_ksubsets(4, 2).unwrap();
        let pos = s
            .iter()
            .position(|x| x.elements() == [1, 3])
            .unwrap();
        assert_eq!(pos, 1);
        assert_eq!(s[pos].colex_rank(), 1);
    }

    #[test]
    fn rank_first_is_zero() {
        let a = KSubset::new(vec![1, 2], 5).unwrap();
        assert_eq!(a.colex_rank(), 0);
    }

    #[test]
    fn unrank_last() {
        let a = colex_unrank(9, 5, 2).unwrap();
        assert_eq!(a.elements(), &[4, 5]);
    }

    #[test]
    fn enumeration_counts_match_factorial_formula() {
        for n in 2..=10u32 {
            for k in 1..=3u32 {
                if n < 2 * k {
                    continue;
                }
                let s = enum_ksubsets(n, k).unwrap();
                assert_eq!(s.len() as u64, binom_by_factorials(n as u64, k as u64));
            }
        }
    }

    #[test]
    fn rank_unrank_inverse_exhaustive() {
        for n in 2..=10u32 {
            for k in 1..=4u32 {
                if n < 2 * k {
                    continue;
                }
                for (pos, a) in enum_ksubsets(n, k).unwrap().into_iter().enumerate() {
                    assert_eq!(a.colex_rank(), pos as u64);
                    assert_eq!(colex_unrank(pos as u64, n, k).unwrap(), a);
                }
            }
        }
    }

    #[test]
    fn unrank_out_of_range_errors() {
        assert!(colex_unrank(10, 5, 2).is_err());
        assert!(enum_ksubsets(3, 2).is_err());
    }

    #[test]
    fn stability_wraparound() {
        assert!(KSubset::new(vec![1, 3], 5).unwrap().is_stable());
        assert!(!KSubset::new(vec![1, 5], 5).unwrap().is_stable());
        assert!(KSubset::new(vec![2, 4, 6], 7).unwrap().is_stable());
        assert!(!KSubset::new(vec![2, 3], 6).unwrap().is_stable());
    }

    #[test]
    fn stable_families() {
        let s = enum_stable(5, 2).unwrap();
        let got: Vec<_> = s.iter().map(|x| x.elements().to_vec()).collect();
        assert_eq!(s.len(), 5);
        for want in [vec![1, 3], vec![2, 4], vec![3, 5], vec![1, 4], vec![2, 5]] {
            assert!(got.contains(&want));
        }
        let s63 = enum_stable(6, 3).unwrap();
        let got: Vec<_> = s63.iter().map(|x| x.elements().to_vec()).collect();
        assert_eq!(got.len(), 2);
        assert!(got.contains(&vec![1, 3, 5]));
        assert!(got.contains(&vec![2, 4, 6]));
        let s42 = enum_stable(4, 2).unwrap();
        let got: Vec<_> = s42.iter().map(|x| x.elements().to_vec()).collect();
        assert_eq!(got, vec![vec![1, 3], vec![2, 4]]);
    }

    #[test]
    fn two_alternating_sets_when_n_is_2k() {
        for k in 1..=4u32 {
            assert_eq!(enum_stable(2 * k, k).unwrap().len(), 2);
        }
    }

    #[test]
    fn petersen_is_three_regular() {
        let s = enum_ksubsets(5, 2).unwrap();
        for a in &s {
            let deg = s.iter().filter(|b| a.disjoint(b)).count();
            assert_eq!(deg, 3);
        }
    }

    #[test]
    fn disjointness_basics() {
        let a = KSubset::new(vec![1, 2], 5).unwrap();
        let b = KSubset::new(vec![3, 4], 5).unwrap();
        let c = KSubset::new(vec![2, 3], 5).unwrap();
        assert!(a.disjoint(&b));
        assert!(!a.disjoint(&c));
    }

    #[test]
    fn firsts_examples() {
        let a = KSubset::new_unguarded(vec![2, 5, 7], 10).unwrap();
        assert_eq!(a.firsts(2).elements(), &[2, 5]);
        let b = KSubset::new_unguarded(vec![1, 2, 3], 10).unwrap();
        assert_eq!(b.firsts(3).elements(), &[1, 2, 3]);
        let c = KSubset::new_unguarded(vec![3, 9, 10], 10).unwrap();
        assert_eq!(c.firsts(2).elements(), &[3, 9]);
    }

    proptest! {
        #[test]
        fn prop_rank_unrank_roundtrip(n in 4u32..=12, r in 0u64..100) {
            let k = 2u32;
            let total = binomial(n as u64, k as u64);
            let r = r % total;
            let a = colex_unrank(r, n, k).unwrap();
            prop_assert_eq!(a.colex_rank(), r);
        }

        #[test]
        fn prop_stable_sets_are_ksubsets(n in 4u32..=10) {
            for s in enum_stable(n, 2).unwrap() {
                prop_assert_eq!(s.k(), 2);
                prop_assert!(s.is_stable());
            }
        }
    }
}
