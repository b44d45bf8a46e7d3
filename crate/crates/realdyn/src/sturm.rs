//! Exact real root isolation over the rationals with Sturm sequences.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;
use crate::scalar::rational_to_f64;

type Q = BigRational;
type QPoly = Poly<Q>;

/// An isolating interval `(lo, hi]` holding exactly one real root, or `lo == hi` for an exact root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Q {
        (&self.lo + &self.hi) / Q::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }
}

#[derive(Clone, Debug)]
pub struct SturmChain {
    seq: Vec<QPoly>,
}

impl SturmChain {
    pub fn new(p: &QPoly) -> Self {
        let mut seq = vec![p.clone()];
        if p.degree() > 0 {
            seq.push(p.derivative());
            loop {
                let n = seq.len();
                let r = seq[n - 2].rem(&seq[n - 1]);
                if r.is_zero() {
                    break;
                }
                seq.push(-&r);
            }
        }
        SturmChain { seq }
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut last = 0;
        let mut v = 0;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    pub fn variations_at(&self, x: &Q) -> usize {
        Self::variations(self.seq.iter().map(|p| p.sign_at(x)))
    }

    pub fn variations_at_pos_inf(&self) -> usize {
        Self::variations(self.seq.iter().map(|p| sign_of(&p.lead())))
    }

    pub fn variations_at_neg_inf(&self) -> usize {
        Self::variations(self.seq.iter().map(|p| {
            let s = sign_of(&p.lead());
            if p.degree() % 2 == 1 {
                -s
            } else {
                s
            }
        }))
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &Q, b: &Q) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }

    pub fn count_all(&self) -> usize {
        self.variations_at_neg_inf()
            .saturating_sub(self.variations_at_pos_inf())
    }
}

fn sign_of(q: &Q) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// A power of two bounding every root in absolute value (Cauchy bound).
pub fn root_bound(p: &QPoly) -> Q {
    let lead = p.lead().abs();
    let mut m = Q::zero();
    for c in &p.coeffs()[..p.degree()] {
        let r = c.abs() / &lead;
        if r > m {
            m = r;
        }
    }
    let b = m + Q::one();
    let mut pow = Q::one();
    while pow < b {
        pow = pow * Q::from_integer(BigInt::from(2));
    }
    pow
}

/// Isolating intervals for the distinct real roots of `p`, in increasing order.
pub fn isolate(p: &QPoly) -> Vec<RootInterval> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let sf = p.square_free_part();
    let chain = SturmChain::new(&sf);
    let b = root_bound(&sf);
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let n = chain.count(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            if sf.sign_at(&hi) == 0 {
                out.push(RootInterval { lo: hi.clone(), hi });
            } else {
                out.push(RootInterval { lo, hi });
            }
            continue;
        }
        let mid = (&lo + &hi) / Q::from_integer(BigInt::from(2));
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Shrink an isolating interval of a square-free `p` until its width is below `width`.
pub fn refine(p: &QPoly, iv: &RootInterval, width: &Q) -> RootInterval {
    if iv.is_exact() {
        return iv.clone();
    }
    let two = Q::from_integer(BigInt::from(2));
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    let s_hi = p.sign_at(&hi);
    if s_hi == 0 {
        return RootInterval { lo: hi.clone(), hi };
    }
    while &(&hi - &lo) >= width {
        let mid = (&lo + &hi) / &two;
        let s = p.sign_at(&mid);
        if s == 0 {
            return RootInterval { lo: mid.clone(), hi: mid };
        }
        if s == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RootInterval { lo, hi }
}

/// Distinct real roots with multiplicities, refined to about double precision.
pub fn real_roots_with_multiplicity(p: &QPoly) -> Vec<(RootInterval, usize)> {
    let mut out = Vec::new();
    for (factor, k) in p.square_free_decomposition() {
        for iv in isolate(&factor) {
            let w = refine_width(&iv);
            out.push((refine(&factor, &iv, &w), k));
        }
    }
    out.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    out
}

fn refine_width(iv: &RootInterval) -> Q {
    let scale = iv.lo.abs().max(iv.hi.abs()).max(Q::one());
    scale * Q::new(BigInt::one(), BigInt::one() << 64usize)
}

/// Smallest real root of `p` in the open interval `(a, b)`, as a bracket of width below `width`.
pub fn smallest_root_in(p: &QPoly, a: &Q, b: &Q, width: &Q) -> Option<RootInterval> {
    if p.degree() == 0 {
        return None;
    }
    let sf = p.square_free_part();
    let chain = SturmChain::new(&sf);
    let at_b = usize::from(sf.sign_at(b) == 0);
    let total = chain.count(a, b).saturating_sub(at_b);
    if total == 0 {
        return None;
    }
    let two = Q::from_integer(BigInt::from(2));
    let (lo, mut hi) = (a.clone(), b.clone());
    let mut lo = lo;
    while &hi - &lo >= *width {
        let mid = (&lo + &hi) / &two;
        if chain.count(&lo, &mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(RootInterval { lo, hi })
}
