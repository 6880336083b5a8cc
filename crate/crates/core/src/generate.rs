//! Small random instances for exactness checks and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{IndicatorCons, LinRow, Problem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MilpParams {
    pub max_int: usize,
    pub max_cont: usize,
    pub max_rows: usize,
    /// Integer upper bounds are drawn from `1..=max_int_ub`.
    pub max_int_ub: i64,
    /// Coefficients are drawn from `-coef..=coef`.
    pub coef: i64,
    /// Probability that a variable duplicates the column of an earlier one.
    pub copy_prob: f64,
}

impl Default for MilpParams {
    fn default() -> Self {
        MilpParams {
            max_int: 8,
            max_cont: 2,
            max_rows: 5,
            max_int_ub: 2,
            coef: 9,
            copy_prob: 0.3,
        }
    }
}

/// Random MILP whose rows all hold at one random lattice point, so most
/// instances are feasible. Integer domains are finite; continuous variables
/// live in `[0, 5]`.
pub fn random_milp<R: Rng>(rng: &mut R, params: &MilpParams) -> Problem {
    let n_int = rng.gen_range(1..=params.max_int);
    let n_cont = rng.gen_range(0..=params.max_cont);
    let n = n_int + n_cont;
    let m = rng.gen_range(1..=params.max_rows);
    let mut p = Problem::new(n);
    p.name = format!("milp_{n}x{m}");
    let mut point = vec![0.0; n];
    for j in 0..n {
        if j < n_int {
            p.integer[j] = true;
            p.upper[j] = rng.gen_range(1..=params.max_int_ub) as f64;
            point[j] = rng.gen_range(0..=p.upper[j] as i64) as f64;
        } else {
            p.upper[j] = 5.0;
            point[j] = rng.gen_range(0..=10) as f64 * 0.5;
        }
    }
    let c = params.coef;
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| if rng.gen_bool(0.7) { rng.gen_range(-c..=c) as f64 } else { 0.0 }).collect())
        .collect();
    let mut obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-c..=c) as f64).collect();
    for j in 1..n {
        if rng.gen_bool(params.copy_prob) {
            let src = rng.gen_range(0..j);
            if p.integer[src] == p.integer[j] {
                cols[j] = cols[src].clone();
                obj[j] = obj[src];
                p.upper[j] = p.upper[src];
                point[j] = point[src];
            }
        }
    }
    for i in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n).filter(|&j| cols[j][i] != 0.0).map(|j| (j, cols[j][i])).collect();
        let act: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
        let slack = rng.gen_range(0..=c) as f64;
        let row = match rng.gen_range(0..10) {
            0..=4 => LinRow::le(coeffs, act + slack),
            5..=8 => LinRow::ge(coeffs, act - slack),
            _ => LinRow::new(coeffs, act - slack, act + slack),
        };
        p.add_row(row);
    }
    if rng.gen_bool(0.5) {
        p.set_maximize(obj);
    } else {
        p.objective = obj;
    }
    p
}

/// Semicontinuous toy: `k` pairs `(z_i, x_i)` with `z_i -> x_i <= 0`,
/// `ℓ_i z_i <= x_i`, `x_i` unbounded above, and a demand row
/// `Σ x_i >= d`. Minimizes fixed plus variable cost.
pub fn semicontinuous_toy<R: Rng>(rng: &mut R, k: usize) -> Problem {
    let mut p = Problem::new(2 * k);
    p.name = format!("semicont_{k}");
    let mut demand_row = Vec::new();
    let mut total_l = 0.0;
    for i in 0..k {
        let (z, x) = (2 * i, 2 * i + 1);
        p.set_binary(z);
        p.objective[z] = rng.gen_range(1..=20) as f64;
        p.objective[x] = rng.gen_range(1..=5) as f64;
        let l = rng.gen_range(1..=10) as f64;
        total_l += l;
        p.indicators.push(IndicatorCons {
            binvar: z,
            var: x,
            activation: l,
        });
        demand_row.push((x, 1.0));
    }
    let demand = rng.gen_range(1..=(total_l as i64).max(1)) as f64 * rng.gen_range(0.3..1.5);
    p.add_row(LinRow::ge(demand_row, demand));
    p
}

/// Random instance over `n` variables for signed symmetry checks: bounds are
/// drawn from a few symmetric and asymmetric boxes, coefficients from a small
/// set so that symmetries are common.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Problem {
    let mut p = Problem::new(n);
    let boxes = [(-1.0, 1.0), (0.0, 1.0), (0.0, 2.0), (-2.0, 2.0), (f64::NEG_INFINITY, f64::INFINITY)];
    let shared = *boxes.choose(rng).expect("nonempty");
    let integer = rng.gen_bool(0.5);
    for j in 0..n {
        let (l, u) = if rng.gen_bool(0.7) { shared } else { *boxes.choose(rng).expect("nonempty") };
        p.lower[j] = l;
        p.upper[j] = u;
        p.integer[j] = integer && l.is_finite() && u.is_finite();
        p.objective[j] = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
    }
    let m = rng.gen_range(1..=3);
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| {
                let a = [-2.0, -1.0, 0.0, 1.0, 2.0][rng.gen_range(0..5)];
                (a != 0.0).then_some((j, a))
            })
            .collect();
        let (l, r) = match rng.gen_range(0..3) {
            0 => (f64::NEG_INFINITY, rng.gen_range(0..=3) as f64),
            1 => {
                let r = rng.gen_range(0..=3) as f64;
                (-r, r)
            }
            _ => (rng.gen_range(-3..=0) as f64, f64::INFINITY),
        };
        p.add_row(LinRow::new(coeffs, l, r));
    }
    p
}
