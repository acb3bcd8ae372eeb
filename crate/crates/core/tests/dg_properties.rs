use std::sync::OnceLock;

use proptest::prelude::*;

use dgm::discrete_gradient::{evaluate, DiscreteGradientKind};
use dgm::linalg::{dist, norm};
use dgm::problems::{LinearConfig, LogisticConfig, Problem, ProblemConfig, QuadraticConfig, SinSquaredConfig, TvConfig};

const DIM: usize = 9;

fn problems() -> &'static [Problem] {
    static CELL: OnceLock<Vec<Problem>> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            ProblemConfig::Quadratic(QuadraticConfig { n: DIM, kappa: 50.0, seed: 1 }),
            ProblemConfig::Linear(LinearConfig { n: DIM, m: 12, kappa: 20.0, seed: 2, ..Default::default() }),
            ProblemConfig::Logistic(LogisticConfig { n: DIM, m: 15, c: 1.0, seed: 3 }),
            ProblemConfig::SinSquared(SinSquaredConfig { n: DIM, kappa: 10.0, seed: 4 }),
            ProblemConfig::Tv(TvConfig { size: 3, epsilon: 1e-2, seed: 5, ..Default::default() }),
        ]
        .iter()
        .map(|c| c.build().unwrap())
        .collect()
    })
}

fn two_point_kinds() -> [DiscreteGradientKind; 3] {
    [DiscreteGradientKind::Gonzalez, DiscreteGradientKind::mean_value(), DiscreteGradientKind::ItohAbe]
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, DIM)
}

fn shifted(p: &Problem, u: &[f64]) -> Vec<f64> {
    p.x0.iter().zip(u).map(|(a, b)| a + b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_value_identity_holds(idx in 0..5usize, u in point(), v in point(), kind in 0..3usize) {
        let p = &problems()[idx];
        let (x, y) = (shifted(p, &u), shifted(p, &v));
        let ev = evaluate(&two_point_kinds()[kind], p.objective(), &x, &y).unwrap();
        prop_assert!(ev.satisfies_mean_value(), "{} residual {:e} for ΔV {:e}", p.family(), ev.mv_residual, ev.delta_v);
    }

    #[test]
    fn coincident_points_give_the_gradient(idx in 0..5usize, u in point(), kind in 0..3usize) {
        let p = &problems()[idx];
        let x = shifted(p, &u);
        let g = p.objective().gradient(&x).unwrap();
        let ev = evaluate(&two_point_kinds()[kind], p.objective(), &x, &x).unwrap();
        prop_assert!(dist(&ev.dg, &g) <= 1e-6 * (1.0 + norm(&g)));
    }

    #[test]
    fn gonzalez_and_mean_value_are_symmetric(idx in 0..5usize, u in point(), v in point()) {
        let p = &problems()[idx];
        let (x, y) = (shifted(p, &u), shifted(p, &v));
        for kind in &two_point_kinds()[..2] {
            let a = evaluate(kind, p.objective(), &x, &y).unwrap();
            let b = evaluate(kind, p.objective(), &y, &x).unwrap();
            prop_assert!(dist(&a.dg, &b.dg) <= 1e-9 * (1.0 + norm(&a.dg)));
        }
    }

    #[test]
    fn gonzalez_equals_mean_value_on_quadratics(idx in 0..2usize, u in point(), v in point()) {
        let p = &problems()[idx];
        let (x, y) = (shifted(p, &u), shifted(p, &v));
        let g = evaluate(&DiscreteGradientKind::Gonzalez, p.objective(), &x, &y).unwrap();
        let m = evaluate(&DiscreteGradientKind::mean_value(), p.objective(), &x, &y).unwrap();
        prop_assert!(dist(&g.dg, &m.dg) <= 1e-12 * (1.0 + norm(&g.dg)));
    }

    #[test]
    fn itoh_abe_uses_one_value_per_coordinate(idx in 0..5usize, u in point(), v in point()) {
        let p = &problems()[idx];
        let (x, y) = (shifted(p, &u), shifted(p, &v));
        prop_assume!(x.iter().zip(&y).all(|(a, b)| a != b));
        let ev = evaluate(&DiscreteGradientKind::ItohAbe, p.objective(), &x, &y).unwrap();
        prop_assert_eq!(ev.evals, DIM + 1);
    }

    #[test]
    fn mean_value_norm_is_bounded_by_gradients_on_the_segment(idx in 0..5usize, u in point(), v in point()) {
        let p = &problems()[idx];
        let (x, y) = (shifted(p, &u), shifted(p, &v));
        let ev = evaluate(&DiscreteGradientKind::mean_value(), p.objective(), &x, &y).unwrap();
        let sup = (0..=200)
            .map(|k| {
                let s = k as f64 / 200.0;
                let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + s * (b - a)).collect();
                norm(&p.objective().gradient(&z).unwrap())
            })
            .fold(0.0, f64::max);
        // The grid maximum can undershoot the true supremum by one grid step of a Lipschitz gradient.
        let slack = p.info.lipschitz * dist(&x, &y) / 200.0;
        prop_assert!(norm(&ev.dg) <= sup + slack + 1e-12);
    }
}
