//! Truncated multivariate Taylor polynomials.

use crate::C64;

/// Taylor coefficients `c_alpha` of a function of `nvars` variables, for all
/// multi-indices of total degree at most `order`. The derivative
/// `d^alpha f` equals `alpha! c_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    /// Dense lookup over exponent vectors in base `order + 1`; `usize::MAX` = absent.
    lookup: Vec<usize>,
    coeffs: Vec<C64>,
}

impl TaylorJet {
    pub fn zero(nvars: usize, order: usize) -> Self {
        let monomials = monomials(nvars, order);
        let base = order + 1;
        let mut lookup = vec![usize::MAX; base.pow(nvars as u32)];
        for (i, m) in monomials.iter().enumerate() {
            lookup[encode(m, base)] = i;
        }
        let coeffs = vec![C64::new(0.0, 0.0); monomials.len()];
        Self {
            nvars,
            order,
            monomials,
            lookup,
            coeffs,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Monomials in graded order (by total degree, then lexicographically descending).
    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.nvars || exps.iter().map(|&e| e as usize).sum::<usize>() > self.order
        {
            return None;
        }
        match self.lookup[encode(exps, self.order + 1)] {
            usize::MAX => None,
            i => Some(i),
        }
    }

    pub fn coeff(&self, exps: &[u8]) -> C64 {
        self.index_of(exps)
            .map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `d^alpha f` at the expansion point.
    pub fn derivative(&self, exps: &[u8]) -> C64 {
        let fact: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
        self.coeff(exps) * fact
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!((self.nvars, self.order), (other.nvars, other.order));
        let mut out = Self::zero(self.nvars, self.order);
        let mut sum = vec![0u8; self.nvars];
        for (i, a) in self.monomials.iter().enumerate() {
            let ca = self.coeffs[i];
            if ca == C64::new(0.0, 0.0) {
                continue;
            }
            let da: usize = a.iter().map(|&e| e as usize).sum();
            for (j, b) in other.monomials.iter().enumerate() {
                let db: usize = b.iter().map(|&e| e as usize).sum();
                if da + db > self.order {
                    // Monomials are graded, so every later one is at least as large.
                    break;
                }
                for k in 0..self.nvars {
                    sum[k] = a[k] + b[k];
                }
                let idx = out.lookup[encode(&sum, self.order + 1)];
                out.coeffs[idx] += ca * other.coeffs[j];
            }
        }
        out
    }

    /// Logarithm of the jet; requires a nonzero constant term.
    pub fn ln(&self) -> Self {
        let c0 = self.coeffs[0];
        let mut h = self.clone();
        for c in h.coeffs.iter_mut() {
            *c /= c0;
        }
        h.coeffs[0] = C64::new(0.0, 0.0);
        let mut out = Self::zero(self.nvars, self.order);
        let mut power = h.clone();
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += p * (sign / k as f64);
            }
            if k < self.order {
                power = power.mul(&h);
            }
        }
        out.coeffs[0] = c0.ln();
        out
    }
}

fn encode(exps: &[u8], base: usize) -> usize {
    exps.iter().rev().fold(0, |acc, &e| acc * base + e as usize)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn monomials(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for degree in 0..=order {
        let mut cur = vec![0u8; nvars];
        push_degree(&mut out, &mut cur, 0, degree);
    }
    out
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e as u8;
        push_degree(out, cur, pos + 1, remaining - e);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(TaylorJet::zero(3, 6).monomials().len(), 84);
        assert_eq!(TaylorJet::zero(2, 2).monomials().len(), 6);
        assert_eq!(TaylorJet::zero(1, 4).monomials().len(), 5);
    }

    #[test]
    fn log_of_exponential_is_linear() {
        // f = exp(2x - 3y) has log f = 2x - 3y exactly.
        let mut jet = TaylorJet::zero(2, 5);
        let mons = jet.monomials().to_vec();
        for (i, m) in mons.iter().enumerate() {
            let (a, b) = (m[0] as i32, m[1] as i32);
            jet.coeffs_mut()[i] = C64::new(
                2f64.powi(a) * (-3f64).powi(b) / (factorial(a as usize) * factorial(b as usize)),
                0.0,
            );
        }
        let l = jet.ln();
        assert!((l.coeff(&[1, 0]) - 2.0).norm() < 1e-12);
        assert!((l.coeff(&[0, 1]) + 3.0).norm() < 1e-12);
        for m in mons.iter().filter(|m| m[0] + m[1] >= 2) {
            assert!(l.coeff(m).norm() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn product_matches_polynomial_multiplication() {
        // (1 + x)(1 - x + y) = 1 + y - x^2 + x y
        let mut a = TaylorJet::zero(2, 3);
        let mut b = TaylorJet::zero(2, 3);
        let i0 = a.index_of(&[0, 0]).unwrap();
        let ix = a.index_of(&[1, 0]).unwrap();
        let iy = a.index_of(&[0, 1]).unwrap();
        a.coeffs_mut()[i0] = C64::new(1.0, 0.0);
        a.coeffs_mut()[ix] = C64::new(1.0, 0.0);
        b.coeffs_mut()[i0] = C64::new(1.0, 0.0);
        b.coeffs_mut()[ix] = C64::new(-1.0, 0.0);
        b.coeffs_mut()[iy] = C64::new(1.0, 0.0);
        let c = a.mul(&b);
        assert_eq!(c.coeff(&[0, 0]), C64::new(1.0, 0.0));
        assert_eq!(c.coeff(&[1, 0]), C64::new(0.0, 0.0));
        assert_eq!(c.coeff(&[2, 0]), C64::new(-1.0, 0.0));
        assert_eq!(c.coeff(&[1, 1]), C64::new(1.0, 0.0));
        assert_eq!(c.coeff(&[0, 1]), C64::new(1.0, 0.0));
    }
}
