//! Running products `lam_bar`, `mu_bar`, `gam_bar`.

use crate::scalar::Scalar;

use super::RateFamilies;

/// `(lam_bar, mu_bar, gam_bar)` at one site and count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulative<T> {
    pub lam_bar: T,
    pub mu_bar: T,
    pub gam_bar: T,
}

/// Memoized running products for one `(site, occupancy)` context.
///
/// Values are extended on demand, so a sweep over `n = 0..m` costs `O(m)`.
#[derive(Debug, Clone)]
pub struct CumulativeProducts<'a, T> {
    rates: &'a RateFamilies<T>,
    site: usize,
    occupancy: Vec<u32>,
    lam: Vec<T>,
    mu: Vec<T>,
    gam: Vec<T>,
}

impl<'a, T: Scalar> CumulativeProducts<'a, T> {
    pub fn new(rates: &'a RateFamilies<T>, site: usize, occupancy: &[u32]) -> Self {
        Self {
            rates,
            site,
            occupancy: occupancy.to_vec(),
            lam: vec![T::one()],
            mu: vec![T::one()],
            gam: vec![T::one()],
        }
    }

    fn extend_to(&mut self, n: u32) {
        let n = n as usize;
        while self.lam.len() <= n {
            let m = self.lam.len() as u32;
            let last = m as usize - 1;
            let lam = self.lam[last] * self.rates.lambda(self.site, m - 1, &self.occupancy);
            let mu = self.mu[last] * self.rates.mu(self.site, m, &self.occupancy);
            let gam = self.gam[last] * self.rates.gamma(self.site, m - 1);
            self.lam.push(lam);
            self.mu.push(mu);
            self.gam.push(gam);
        }
    }

    pub fn get(&mut self, n: u32) -> Cumulative<T> {
        self.extend_to(n);
        let n = n as usize;
        Cumulative {
            lam_bar: self.lam[n],
            mu_bar: self.mu[n],
            gam_bar: self.gam[n],
        }
    }
}

/// Direct evaluation of the three running products.
pub fn cumulative<T: Scalar>(
    rates: &RateFamilies<T>,
    site: usize,
    n: u32,
    occupancy: &[u32],
) -> Cumulative<T> {
    let mut out = Cumulative {
        lam_bar: T::one(),
        mu_bar: T::one(),
        gam_bar: T::one(),
    };
    for m in 0..n {
        out.lam_bar = out.lam_bar * rates.lambda(site, m, occupancy);
        out.mu_bar = out.mu_bar * rates.mu(site, m + 1, occupancy);
        out.gam_bar = out.gam_bar * rates.gamma(site, m);
    }
    out
}

/// `ln lam_bar - ln mu_bar` at one site; `-inf` when arrivals are blocked below `n`.
pub fn log_task_ratio<T: Scalar>(rates: &RateFamilies<T>, site: usize, n: u32, y: &[u32]) -> T {
    let mut acc = T::zero();
    for m in 0..n {
        let lam = rates.lambda(site, m, y);
        if lam <= T::zero() {
            return T::neg_infinity();
        }
        acc = acc + lam.ln() - rates.mu(site, m + 1, y).ln();
    }
    acc
}

/// `ln gam_bar(n)`; `-inf` when the gauge vanishes below `n`.
pub fn log_gauge_bar<T: Scalar>(rates: &RateFamilies<T>, site: usize, n: u32) -> T {
    let mut acc = T::zero();
    for m in 0..n {
        let g = rates.gamma(site, m);
        if g <= T::zero() {
            return T::neg_infinity();
        }
        acc = acc + g.ln();
    }
    acc
}

/// `ln V(n; y) = sum_q ln(lam_bar_q(n_q; y) / mu_bar_q(n_q; y))`.
pub fn log_task_weight<T: Scalar>(rates: &RateFamilies<T>, n: &[u32], y: &[u32]) -> T {
    let mut acc = T::zero();
    for (q, &nq) in n.iter().enumerate() {
        let term = log_task_ratio(rates, q, nq, y);
        if term == T::neg_infinity() {
            return term;
        }
        acc = acc + term;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{Gauge, Intensity};

    fn families() -> RateFamilies<f64> {
        let mut r = RateFamilies::new(2);
        r.lambda = vec![Intensity::Constant(2.0), Intensity::blocked(1.5, 2.0).unwrap()];
        r.mu = vec![Intensity::Constant(2.0), Intensity::servers(1.0, 2.0).unwrap()];
        r.gamma = vec![Gauge::InverseCount { phi: 0.0 }, Gauge::LinearCount { phi: 0.3 }];
        r
    }

    #[test]
    fn constant_products() {
        let r = families();
        let c = cumulative(&r, 0, 3, &[0, 0]);
        assert_eq!(c.lam_bar, 8.0);
        assert_eq!(c.mu_bar, 8.0);
    }

    #[test]
    fn empty_products_are_one() {
        let r = families();
        for site in 0..2 {
            let c = cumulative(&r, site, 0, &[1, 0]);
            assert_eq!((c.lam_bar, c.mu_bar, c.gam_bar), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn inverse_count_gauge_bar_is_reciprocal_factorial() {
        let r = families();
        let c = cumulative(&r, 0, 4, &[0, 0]);
        assert!((c.gam_bar - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn memo_table_matches_direct_products_bitwise() {
        let r = families();
        for site in 0..2 {
            let mut table = CumulativeProducts::new(&r, site, &[0, 1]);
            for n in (0..12).rev() {
                assert_eq!(table.get(n), cumulative(&r, site, n, &[0, 1]));
            }
        }
    }

    #[test]
    fn blocked_arrivals_give_zero_weight() {
        let r = families();
        assert_eq!(log_task_ratio(&r, 1, 3, &[0, 0]), f64::NEG_INFINITY);
        let direct = cumulative(&r, 1, 2, &[0, 0]);
        let logged = log_task_ratio(&r, 1, 2, &[0, 0]);
        assert!((logged.exp() - direct.lam_bar / direct.mu_bar).abs() < 1e-15);
    }
}
