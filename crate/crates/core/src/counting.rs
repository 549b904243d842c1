//! Popcount circuits built as a balanced tree of ripple adders, semantic
//! checks of the four counting identities used by the k = 2 argument, and
//! bit-vector arithmetic helpers for binary encodings.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input(u32),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Xor(u32, u32),
}

/// Boolean circuit whose outputs are the binary encoding (LSB first) of the
/// number of true inputs.
#[derive(Debug, Clone)]
pub struct CountCircuit {
    n: usize,
    gates: Vec<Gate>,
    outputs: Vec<u32>,
}

fn bits_for(x: usize) -> usize {
    // width of the binary encoding of values 0..=x
    (usize::BITS - x.leading_zeros()).max(1) as usize
}

struct Builder {
    gates: Vec<Gate>,
}

impl Builder {
    fn push(&mut self, g: Gate) -> u32 {
        self.gates.push(g);
        (self.gates.len() - 1) as u32
    }

    /// Ripple-add two encodings with known maximum values; the result is
    /// truncated to the width of max_a + max_b (higher bits are provably 0).
    fn add(&mut self, a: &[u32], max_a: usize, b: &[u32], max_b: usize) -> Vec<u32> {
        let width = bits_for(max_a + max_b);
        let mut out = Vec::with_capacity(width);
        let mut carry: Option<u32> = None;
        for i in 0..a.len().max(b.len()) {
            let want_carry = i + 1 < width;
            let (sum, next) = match (a.get(i), b.get(i), carry) {
                (Some(&x), Some(&y), None) => {
                    let s = self.push(Gate::Xor(x, y));
                    let c = want_carry.then(|| self.push(Gate::And(x, y)));
                    (s, c)
                }
                (Some(&x), Some(&y), Some(c)) => {
                    let t = self.push(Gate::Xor(x, y));
                    let s = self.push(Gate::Xor(t, c));
                    let next = want_carry.then(|| {
                        let g1 = self.push(Gate::And(x, y));
                        let g2 = self.push(Gate::And(t, c));
                        self.push(Gate::Or(g1, g2))
                    });
                    (s, next)
                }
                (Some(&x), None, Some(c)) | (None, Some(&x), Some(c)) => {
                    let s = self.push(Gate::Xor(x, c));
                    let next = want_carry.then(|| self.push(Gate::And(x, c)));
                    (s, next)
                }
                (Some(&x), None, None) | (None, Some(&x), None) => (x, None),
                (None, None, _) => unreachable!("loop bounded by max length"),
            };
            out.push(sum);
            carry = next;
        }
        if let Some(c) = carry {
            out.push(c);
        }
        debug_assert!(out.len() <= width);
        out
    }

    /// Popcount encoding of inputs[lo..hi]; returns (bits, max value).
    fn count_range(&mut self, lo: usize, hi: usize) -> (Vec<u32>, usize) {
        if hi - lo == 1 {
            return (vec![lo as u32], 1);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, ma) = self.count_range(lo, mid);
        let (b, mb) = self.count_range(mid, hi);
        let bits = self.add(&a, ma, &b, mb);
        (bits, ma + mb)
    }
}

pub fn build_count(n: usize) -> Result<CountCircuit> {
    if n < 1 {
        return Err(Error::invalid("count circuit needs n >= 1"));
    }
    let mut b = Builder {
        gates: (0..n).map(|i| Gate::Input(i as u32)).collect(),
    };
    let (outputs, max) = b.count_range(0, n);
    debug_assert_eq!(max, n);
    debug_assert_eq!(outputs.len(), bits_for(n));
    Ok(CountCircuit {
        n,
        gates: b.gates,
        outputs,
    })
}

impl CountCircuit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn output_width(&self) -> usize {
        self.outputs.len()
    }

    /// Non-input gate count.
    pub fn size(&self) -> usize {
        self.gates.len() - self.n
    }

    pub fn eval(&self, input: &[bool]) -> Result<u64> {
        if input.len() != self.n {
            return Err(Error::invalid(format!(
                "input width {} does not match circuit width {}",
                input.len(),
                self.n
            )));
        }
        let mut val = vec![false; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            val[i] = match *g {
                Gate::Input(j) => input[j as usize],
                Gate::Not(a) => !val[a as usize],
                Gate::And(a, b) => val[a as usize] && val[b as usize],
                Gate::Or(a, b) => val[a as usize] || val[b as usize],
                Gate::Xor(a, b) => val[a as usize] != val[b as usize],
            };
        }
        let mut out = 0u64;
        for (bit, &g) in self.outputs.iter().enumerate() {
            if val[g as usize] {
                out |= 1 << bit;
            }
        }
        Ok(out)
    }

    /// Simple text netlist for inspection.
    pub fn to_netlist(&self) -> String {
        let mut s = String::new();
        for (i, g) in self.gates.iter().enumerate() {
            let line = match *g {
                Gate::Input(j) => format!("g{i} = INPUT {j}"),
                Gate::Not(a) => format!("g{i} = NOT g{a}"),
                Gate::And(a, b) => format!("g{i} = AND g{a} g{b}"),
                Gate::Or(a, b) => format!("g{i} = OR g{a} g{b}"),
                Gate::Xor(a, b) => format!("g{i} = XOR g{a} g{b}"),
            };
            s.push_str(&line);
            s.push('\n');
        }
        for (bit, g) in self.outputs.iter().enumerate() {
            s.push_str(&format!("output b{bit} = g{g}\n"));
        }
        s
    }
}

pub fn circuit_size(n: usize) -> Result<usize> {
    Ok(build_count(n)?.size())
}

// ---------------------------------------------------------------------------
// bit-vector arithmetic on binary encodings (LSB first)

pub mod bits {
    pub fn encode(mut x: u64, width: usize) -> Vec<bool> {
        let mut v = Vec::with_capacity(width);
        for _ in 0..width {
            v.push(x & 1 == 1);
            x >>= 1;
        }
        v
    }

    pub fn to_u64(v: &[bool]) -> u64 {
        v.iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn eq(a: &[bool], b: &[bool]) -> bool {
        let w = a.len().max(b.len());
        (0..w).all(|i| a.get(i).copied().unwrap_or(false) == b.get(i).copied().unwrap_or(false))
    }

    pub fn leq(a: &[bool], b: &[bool]) -> bool {
        let w = a.len().max(b.len());
        for i in (0..w).rev() {
            let x = a.get(i).copied().unwrap_or(false);
            let y = b.get(i).copied().unwrap_or(false);
            if x != y {
                return y;
            }
        }
        true
    }

    pub fn add(a: &[bool], b: &[bool]) -> Vec<bool> {
        let w = a.len().max(b.len()) + 1;
        let mut out = Vec::with_capacity(w);
        let mut carry = false;
        for i in 0..w {
            let x = a.get(i).copied().unwrap_or(false);
            let y = b.get(i).copied().unwrap_or(false);
            out.push(x ^ y ^ carry);
            carry = (x && y) || (carry && (x ^ y));
        }
        out
    }

    /// a - 1, saturating at 0 for the empty encoding.
    pub fn dec(a: &[bool]) -> Vec<bool> {
        let mut out = a.to_vec();
        for slot in out.iter_mut() {
            if *slot {
                *slot = false;
                return out;
            }
            *slot = true;
        }
        // a was zero; keep zero
        vec![false; a.len()]
    }

    pub fn mul(a: &[bool], b: &[bool]) -> Vec<bool> {
        let mut acc = vec![false; a.len() + b.len()];
        for (i, &bit) in b.iter().enumerate() {
            if bit {
                let mut shifted = vec![false; i];
                shifted.extend_from_slice(a);
                acc = add(&acc, &shifted);
            }
        }
        acc
    }

    pub fn shr1(a: &[bool]) -> Vec<bool> {
        if a.is_empty() {
            vec![]
        } else {
            a[1..].to_vec()
        }
    }

    /// C(x, 2) = x (x - 1) / 2 computed on the encoding.
    pub fn choose2(a: &[bool]) -> Vec<bool> {
        shr1(&mul(a, &dec(a)))
    }
}

// ---------------------------------------------------------------------------
// the four counting identities, checked semantically

#[derive(Debug, Clone)]
pub struct IdentityItem {
    pub pass: bool,
    pub checked: u64,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub n: usize,
    pub exhaustive: bool,
    pub items: [IdentityItem; 4],
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (idx, item) in self.items.iter().enumerate() {
            out.push_str(&format!(
                "identity item={} n={} mode={} checked={} verdict={}{}\n",
                idx + 1,
                self.n,
                if self.exhaustive { "exhaustive" } else { "sampled" },
                item.checked,
                if item.pass { "pass" } else { "fail" },
                item.counterexample
                    .as_deref()
                    .map(|c| format!(" counterexample={c}"))
                    .unwrap_or_default()
            ));
        }
        out
    }
}

/// Check items 1-4 on all assignments (n <= 16) or on `samples` random
/// assignments. The superset pairs of item 4 are enumerated exhaustively
/// only up to n = 12 (3^n pairs), sampled above.
pub fn check_count_identities(n: usize, samples: u64, seed: u64) -> Result<IdentityReport> {
    use rand::{Rng, SeedableRng};
    let exhaustive = n <= 16;
    let counter = build_count(n)?;
    let pair_count = n * (n - 1) / 2;
    let pair_counter = if pair_count > 0 {
        Some(build_count(pair_count)?)
    } else {
        None
    };
    let grid_counter = build_count(n * n)?;

    let mut items: [IdentityItem; 4] = std::array::from_fn(|_| IdentityItem {
        pass: true,
        checked: 0,
        counterexample: None,
    });
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let assignments: Box<dyn Iterator<Item = u64>> = if exhaustive {
        Box::new(0..(1u64 << n))
    } else {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        Box::new((0..samples).map(move |_| r.random::<u64>() & ((1u64 << n) - 1)))
    };

    for x in assignments {
        let input: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
        let cnt = counter.eval(&input)?;

        // item 1: all conjuncts true forces count = n
        if x == (1u64 << n) - 1 {
            items[0].checked += 1;
            if cnt != n as u64 {
                fail(&mut items[0], format!("x={x:#b} count={cnt}"));
            }
        }

        // item 2: count over pairwise conjunctions equals C(count, 2)
        if let Some(pc) = &pair_counter {
            let mut pair_input = Vec::with_capacity(pair_count);
            for i in 0..n {
                for j in i + 1..n {
                    pair_input.push(input[i] && input[j]);
                }
            }
            let lhs = pc.eval(&pair_input)?;
            let rhs = cnt * cnt.saturating_sub(1) / 2;
            let rhs_bits = bits::choose2(&bits::encode(cnt, 8));
            items[1].checked += 1;
            if lhs != rhs || !bits::eq(&bits::encode(lhs, rhs_bits.len()), &rhs_bits) {
                fail(&mut items[1], format!("x={x:#b} lhs={lhs} rhs={rhs}"));
            }
        }

        // item 3: count over the (i, j != i) grid equals count * (n - 1)
        let mut grid = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                grid.push(input[i] && i != j);
            }
        }
        let lhs = grid_counter.eval(&grid)?;
        items[2].checked += 1;
        if lhs != cnt * (n as u64 - 1) {
            fail(&mut items[2], format!("x={x:#b} lhs={lhs} cnt={cnt}"));
        }

        // item 4: pointwise dominance implies count dominance
        if exhaustive && n <= 12 {
            // enumerate supersets y of x
            let full = (1u64 << n) - 1;
            let comp = full & !x;
            let mut extra = comp;
            loop {
                let y = x | extra;
                let y_input: Vec<bool> = (0..n).map(|i| y >> i & 1 == 1).collect();
                let cy = counter.eval(&y_input)?;
                items[3].checked += 1;
                if cnt > cy {
                    fail(&mut items[3], format!("x={x:#b} y={y:#b}"));
                }
                if extra == 0 {
                    break;
                }
                extra = (extra - 1) & comp;
            }
        } else {
            let y = x | (rng.random::<u64>() & ((1u64 << n) - 1));
            let y_input: Vec<bool> = (0..n).map(|i| y >> i & 1 == 1).collect();
            let cy = counter.eval(&y_input)?;
            items[3].checked += 1;
            if cnt > cy {
                fail(&mut items[3], format!("x={x:#b} y={y:#b}"));
            }
        }
    }

    Ok(IdentityReport {
        n,
        exhaustive,
        items,
    })
}

fn fail(item: &mut IdentityItem, cex: String) {
    if item.pass {
        item.pass = false;
        item.counterexample = Some(cex);
    }
}
