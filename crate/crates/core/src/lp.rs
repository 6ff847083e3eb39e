//! Dense two-phase simplex with Bland's rule.
//!
//! All variables are free; each is split into a positive and a negative
//! part internally. Generic over `f64` and exact rationals.

use std::fmt::Debug;

use num_traits::{Num, Signed, ToPrimitive};

use crate::rational::Q;

pub trait Scalar: Clone + PartialOrd + Debug + Num + Signed {
    fn eps() -> Self;
    fn from_f64(x: f64) -> Self;
    fn as_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn eps() -> Self {
        1e-10
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Q {
    fn eps() -> Self {
        Q::from_integer(0.into())
    }
    fn from_f64(x: f64) -> Self {
        crate::rational::q(x)
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Lp<T> {
    pub n: usize,
    /// Maximized.
    pub objective: Vec<T>,
    pub rows: Vec<(Vec<T>, Cmp, T)>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    /// `x` is feasible and `x + t ray` stays feasible for all `t >= 0`
    /// while the objective grows without bound.
    Unbounded { x: Vec<T>, ray: Vec<T> },
    Infeasible,
    IterationLimit,
}

impl<T: Scalar> Lp<T> {
    pub fn new(n: usize) -> Self {
        Lp { n, objective: vec![T::zero(); n], rows: Vec::new() }
    }

    pub fn row(&mut self, a: Vec<T>, cmp: Cmp, b: T) -> &mut Self {
        debug_assert_eq!(a.len(), self.n);
        self.rows.push((a, cmp, b));
        self
    }

    pub fn maximize(&mut self, c: Vec<T>) -> &mut Self {
        self.objective = c;
        self
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).run(self)
    }
}

struct Tableau<T> {
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    art_start: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &Lp<T>) -> Self {
        let n = lp.n;
        let m = lp.rows.len();
        let mut rows: Vec<(Vec<T>, Cmp, T)> = Vec::with_capacity(m);
        for (a, cmp, b) in &lp.rows {
            if b.is_negative() {
                let flip = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                rows.push((a.iter().map(|x| -x.clone()).collect(), flip, -b.clone()));
            } else {
                rows.push((a.clone(), *cmp, b.clone()));
            }
        }
        let n_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Cmp::Le).count();
        let art_start = 2 * n + n_slack;
        let cols = art_start + n_art;
        let mut t = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut si, mut ai) = (2 * n, art_start);
        for (a, cmp, b) in rows {
            let mut r = vec![T::zero(); cols + 1];
            for j in 0..n {
                r[j] = a[j].clone();
                r[n + j] = -a[j].clone();
            }
            match cmp {
                Cmp::Le => {
                    r[si] = T::one();
                    basis.push(si);
                    si += 1;
                }
                Cmp::Ge => {
                    r[si] = -T::one();
                    si += 1;
                    r[ai] = T::one();
                    basis.push(ai);
                    ai += 1;
                }
                Cmp::Eq => {
                    r[ai] = T::one();
                    basis.push(ai);
                    ai += 1;
                }
            }
            r[cols] = b;
            t.push(r);
        }
        Tableau { t, basis, cols, art_start }
    }

    fn pivot(&mut self, obj: &mut [T], pr: usize, pc: usize) {
        let cols = self.cols;
        let inv = T::one() / self.t[pr][pc].clone();
        for x in self.t[pr].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let prow = self.t[pr].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == pr {
                continue;
            }
            let f = row[pc].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..=cols {
                if !prow[j].is_zero() {
                    row[j] = row[j].clone() - f.clone() * prow[j].clone();
                }
            }
        }
        let f = obj[pc].clone();
        if !f.is_zero() {
            for j in 0..=cols {
                if !prow[j].is_zero() {
                    obj[j] = obj[j].clone() - f.clone() * prow[j].clone();
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Reduced-cost row for objective `c` over the current basis.
    fn objective_row(&self, c: &[T]) -> Vec<T> {
        let mut obj: Vec<T> = c.to_vec();
        obj.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = obj[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.cols {
                obj[j] = obj[j].clone() - cb.clone() * self.t[i][j].clone();
            }
        }
        obj
    }

    /// Returns `Ok(())` at optimum, `Err(Some(col))` when unbounded along
    /// `col`, `Err(None)` on iteration limit.
    fn iterate(&mut self, obj: &mut Vec<T>, allowed: usize) -> Result<(), Option<usize>> {
        let eps = T::eps();
        let limit = 50 * (self.cols + self.t.len() + 10);
        for _ in 0..limit {
            let Some(pc) = (0..allowed).find(|&j| obj[j] > eps) else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][pc];
                if *a > eps {
                    let ratio = self.t[i][self.cols].clone() / a.clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return Err(Some(pc)),
                Some((pr, _)) => self.pivot(obj, pr, pc),
            }
        }
        Err(None)
    }

    fn primal(&self, n: usize) -> Vec<T> {
        let mut z = vec![T::zero(); self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            z[b] = self.t[i][self.cols].clone();
        }
        (0..n).map(|j| z[j].clone() - z[n + j].clone()).collect()
    }

    fn run(mut self, lp: &Lp<T>) -> LpOutcome<T> {
        let n = lp.n;
        let cols = self.cols;
        if self.art_start < cols {
            let mut c1 = vec![T::zero(); cols];
            for c in c1.iter_mut().skip(self.art_start) {
                *c = -T::one();
            }
            let mut obj = self.objective_row(&c1);
            match self.iterate(&mut obj, cols) {
                Ok(()) => {}
                Err(Some(_)) | Err(None) => return LpOutcome::IterationLimit,
            }
            let value = -obj[cols].clone();
            let scale: T = lp
                .rows
                .iter()
                .fold(T::one(), |acc, r| if r.2.abs() > acc { r.2.abs() } else { acc });
            if value < -(T::eps() * scale * T::from_f64(100.0)) {
                return LpOutcome::Infeasible;
            }
            // drive artificials out of the basis
            let mut i = 0;
            while i < self.t.len() {
                if self.basis[i] >= self.art_start {
                    let col = (0..self.art_start).find(|&j| self.t[i][j].abs() > T::eps());
                    match col {
                        Some(j) => {
                            let mut dummy = vec![T::zero(); cols + 1];
                            self.pivot(&mut dummy, i, j);
                            i += 1;
                        }
                        None => {
                            self.t.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut c2 = vec![T::zero(); cols];
        for j in 0..n {
            c2[j] = lp.objective[j].clone();
            c2[n + j] = -lp.objective[j].clone();
        }
        let mut obj = self.objective_row(&c2);
        match self.iterate(&mut obj, self.art_start) {
            Ok(()) => {
                let x = self.primal(n);
                let value = x
                    .iter()
                    .zip(&lp.objective)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
                LpOutcome::Optimal { x, value }
            }
            Err(Some(pc)) => {
                let mut d = vec![T::zero(); cols];
                d[pc] = T::one();
                for (i, &b) in self.basis.iter().enumerate() {
                    d[b] = -self.t[i][pc].clone();
                }
                let ray = (0..n).map(|j| d[j].clone() - d[n + j].clone()).collect();
                LpOutcome::Unbounded { x: self.primal(n), ray }
            }
            Err(None) => LpOutcome::IterationLimit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn simple_optimum() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let mut lp = Lp::<f64>::new(2);
        lp.maximize(vec![1.0, 1.0])
            .row(vec![1.0, 2.0], Cmp::Le, 4.0)
            .row(vec![3.0, 1.0], Cmp::Le, 6.0);
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert!((value - 2.8).abs() < 1e-12);
                assert!((x[0] - 1.6).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_ray_is_recession() {
        let mut lp = Lp::<f64>::new(2);
        lp.maximize(vec![0.0, 1.0]).row(vec![1.0, -1.0], Cmp::Le, 0.0);
        match lp.solve() {
            LpOutcome::Unbounded { ray, .. } => {
                assert!(ray[0] - ray[1] <= 1e-12);
                assert!(ray[1] > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = Lp::<Q>::new(1);
        lp.row(vec![qi(1)], Cmp::Ge, qi(2)).row(vec![qi(1)], Cmp::Le, qi(1));
        assert!(matches!(lp.solve(), LpOutcome::Infeasible));
    }

    #[test]
    fn equality_rows_and_negative_rhs() {
        let mut lp = Lp::<Q>::new(2);
        lp.maximize(vec![qi(1), qi(0)])
            .row(vec![qi(1), qi(1)], Cmp::Eq, qi(-1))
            .row(vec![qi(0), qi(-1)], Cmp::Le, qi(0));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, qi(-1)),
            other => panic!("{other:?}"),
        }
    }
}
