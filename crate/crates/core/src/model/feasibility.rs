use super::{Problem, Solution, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Row(usize),
    LowerBound(usize),
    UpperBound(usize),
    Integrality(usize),
    /// `z = 0` but `x > 0`.
    Indicator(usize),
    /// Activation row `ℓ z <= x` of an indicator constraint.
    Activation(usize),
    Signomial(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.magnitude)
            .fold(0.0, f64::max)
    }

    pub fn find(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }
}

/// Lists every violated row, bound, integrality requirement, indicator and
/// signomial relation of `s`.
pub fn check_feasible(p: &Problem, s: &Solution, tol: &Tolerances) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let x = &s.values;
    let mut push = |kind, magnitude: f64, limit: f64| {
        if magnitude > limit {
            report.violations.push(Violation { kind, magnitude });
        }
    };
    if x.len() != p.num_vars() {
        push(ViolationKind::Row(usize::MAX), f64::INFINITY, 0.0);
        return report;
    }
    for j in 0..p.num_vars() {
        push(ViolationKind::LowerBound(j), p.lower[j] - x[j], tol.feas);
        push(ViolationKind::UpperBound(j), x[j] - p.upper[j], tol.feas);
        if p.integer[j] {
            push(
                ViolationKind::Integrality(j),
                (x[j] - x[j].round()).abs(),
                tol.int,
            );
        }
    }
    for (i, row) in p.rows.iter().enumerate() {
        let act = row.activity(x);
        let viol = (row.lhs - act).max(act - row.rhs);
        push(ViolationKind::Row(i), viol, tol.feas);
    }
    for (k, ind) in p.indicators.iter().enumerate() {
        let (z, v) = (x[ind.binvar], x[ind.var]);
        if z <= tol.int && v > tol.feas {
            push(ViolationKind::Indicator(k), v, 0.0);
        }
        push(
            ViolationKind::Activation(k),
            ind.activation * z - v,
            tol.feas,
        );
    }
    for (k, term) in p.signomials.iter().enumerate() {
        push(ViolationKind::Signomial(k), term.violation(x), tol.feas);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IndicatorCons, LinRow};

    fn sol(values: Vec<f64>) -> Solution {
        Solution {
            values,
            objective: 0.0,
        }
    }

    #[test]
    fn zero_point_is_feasible() {
        let mut p = Problem::new(2);
        p.add_row(LinRow::le(vec![(0, 2.0), (1, 1.0)], 100.0));
        let r = check_feasible(&p, &sol(vec![0.0, 0.0]), &Tolerances::default());
        assert!(r.is_feasible());
    }

    #[test]
    fn indicator_violation_reports_x_value() {
        let mut p = Problem::new(2);
        p.set_binary(0);
        p.indicators.push(IndicatorCons {
            binvar: 0,
            var: 1,
            activation: 1.0,
        });
        let r = check_feasible(&p, &sol(vec![0.0, 3.0]), &Tolerances::default());
        let v = r.find(ViolationKind::Indicator(0)).unwrap();
        assert_eq!(v.magnitude, 3.0);
    }

    #[test]
    fn knapsack_row_violated_by_one() {
        let mut p = Problem::new(2);
        p.set_binary(0);
        p.set_binary(1);
        p.add_row(LinRow::le(vec![(0, 2.0), (1, 2.0)], 3.0));
        let r = check_feasible(&p, &sol(vec![1.0, 1.0]), &Tolerances::default());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::Row(0));
        assert!((r.violations[0].magnitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_integer_is_reported() {
        let mut p = Problem::new(1);
        p.integer[0] = true;
        let r = check_feasible(&p, &sol(vec![0.5]), &Tolerances::default());
        assert!(r.find(ViolationKind::Integrality(0)).is_some());
    }
}
