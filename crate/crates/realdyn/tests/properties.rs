use num_complex::Complex;
use proptest::prelude::*;
use realdyn::blaschke::{
    cayley, circle_degree_of, circle_julia_normal_form, joukowsky_quotient, BlaschkeProduct, QuotientMode,
};
use realdyn::degree::{quadrature_degree, topological_degree};
use realdyn::entropy::{
    cut_lap_counts, lap_counts, lap_entropy, lap_entropy_within_budget, preimage_counts, POINT_BUDGET,
};
use realdyn::families::{perturbed_power_cover, quadratic, sweep, Estimator, FamilySpec};
use realdyn::kneading::kneading_determinant;
use realdyn::scalar::{rational_from_f64, rational_to_f64};
use realdyn::{MobiusReal, Point64, RealRationalMap};

type C64 = Complex<f64>;

/// Maps of degree 2..=4 with small integer coefficients.
fn small_map() -> impl Strategy<Value = RealRationalMap> {
    (2usize..=4, any::<bool>(), 0usize..=4)
        .prop_flat_map(|(d, top_num, other)| {
            let other = other.min(d);
            let (dp, dq) = if top_num { (d, other) } else { (other, d) };
            (
                prop::collection::vec(-4i64..=4, dp + 1),
                prop::collection::vec(-4i64..=4, dq + 1),
                1i64..=4,
                1i64..=4,
            )
        })
        .prop_filter_map("degenerate map", |(mut p, mut q, lp, lq)| {
            *p.last_mut().unwrap() = lp;
            *q.last_mut().unwrap() = lq;
            RealRationalMap::from_i64(&p, &q).ok().filter(|f| f.degree() >= 2)
        })
}

fn mobius() -> impl Strategy<Value = MobiusReal> {
    prop::array::uniform4(-3i64..=3).prop_filter_map("singular", |[a, b, c, d]| MobiusReal::from_i64(a, b, c, d).ok())
}

fn chart_gap(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(1.0);
    r.min(1.0 - r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_round_trips_exactly(f in small_map(), m in mobius()) {
        let g = f.conjugate(&m).unwrap();
        let back = g.conjugate(&m.inverse().unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn constructed_maps_have_nonzero_resultant(f in small_map(), m in mobius()) {
        prop_assert!(f.resultant() != rational_from_f64(0.0));
        prop_assert!(f.conjugate(&m).unwrap().resultant() != rational_from_f64(0.0));
    }

    #[test]
    fn exact_and_float_evaluation_agree(f in small_map(), x in -20.0f64..20.0) {
        let q = rational_from_f64(x);
        let exact = f.eval_exact(Some(&q));
        let float = f.eval(&Point64::finite(x)).angle();
        match exact {
            Some(v) => {
                let t = Point64::finite(rational_to_f64(&v)).angle();
                // skip inputs whose image sits near ∞, i.e. inputs near poles
                if chart_gap(t, 0.0) > 1e-6 {
                    prop_assert!(chart_gap(t, float) < 1e-10, "{} vs {}", t, float);
                }
            }
            None => prop_assert!(chart_gap(float, 0.0) < 1e-6),
        }
    }

    #[test]
    fn critical_points_move_with_conjugation(f in small_map(), m in mobius()) {
        let g = f.conjugate(&m).unwrap();
        let cf = f.critical_points_real();
        let cg = g.critical_points_real();
        prop_assert_eq!(cf.len(), cg.len());
        for (c, k) in &cf {
            let image = m.apply(c);
            prop_assert!(
                cg.iter().any(|(x, j)| j == k && x.distance(&image) < 1e-6),
                "{:?} -> {:?} not among {:?}", c, image, cg
            );
        }
    }

    #[test]
    fn fixed_point_multipliers_are_invariant(f in small_map(), m in mobius()) {
        let g = f.conjugate(&m).unwrap();
        let ff = f.fixed_points_real();
        let fg = g.fixed_points_real();
        prop_assert_eq!(ff.len(), fg.len());
        for p in &ff {
            let image = m.apply(&p.point);
            let q = fg.iter().find(|q| q.point.distance(&image) < 1e-6);
            prop_assert!(q.is_some(), "fixed point {:?} lost", p.point);
            let q = q.unwrap();
            prop_assert!((q.multiplier - p.multiplier).abs() < 1e-10 * p.multiplier.abs().max(1.0));
            prop_assert_eq!(q.multiplicity, p.multiplicity);
        }
    }

    #[test]
    fn degree_parity_and_invariance(f in small_map(), m in mobius()) {
        let s = topological_degree(&f).unwrap();
        let d = f.degree() as i64;
        prop_assert_eq!((d - s).rem_euclid(2), 0);
        prop_assert!(s.abs() <= d);
        prop_assert_eq!(topological_degree(&f.conjugate(&m).unwrap()).unwrap(), s);
        prop_assert!((quadrature_degree(&f, 4096) - s as f64).abs() < 0.5);
    }

    #[test]
    fn preimages_fit_in_laps(f in small_map(), x in -3.0f64..3.0) {
        let n = 5;
        if let (Ok(cut), Ok(laps)) = (cut_lap_counts(&f, n), lap_counts(&f, n)) {
            let pre = preimage_counts(&f, &Point64::finite(x), n).unwrap();
            for k in 1..=n {
                prop_assert!(pre[k] <= cut[k - 1], "depth {}: {:?} vs {:?}", k, pre, cut);
                // one preimage per lap, plus the cut
                prop_assert!(pre[k] <= 2 * laps[k - 1], "depth {}: {:?} vs 2*{:?}", k, pre, laps);
            }
        }
    }

    #[test]
    fn upper_bracket_never_rises(f in small_map()) {
        let mut last = f64::INFINITY;
        for n in 1..=7 {
            match lap_entropy(&f, n) {
                Ok(e) => {
                    prop_assert!(e.upper <= last + 1e-12);
                    prop_assert!(e.lower <= e.upper + 1e-12);
                    last = e.upper;
                }
                Err(_) => break,
            }
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn minors_agree_and_root_is_algebraic(c in -2.5f64..0.5, a in -1.5f64..1.5) {
        // quadratic and cubic polynomial families
        let maps = [
            quadratic(c),
            RealRationalMap::from_f64(&[a, -3.0, 0.0, 1.0], &[1.0]).unwrap(),
        ];
        for f in &maps {
            let Ok(inv) = kneading_determinant(f) else { continue };
            prop_assert!(inv.minors_consistent());
            if let Some(rate) = inv.growth_rate() {
                let x = inv.entropy.exp();
                let p = rate.poly.to_f64();
                let (mut v, mut scale) = (0.0, 0.0);
                for (k, c) in p.coeffs().iter().enumerate() {
                    v += c * x.powi(k as i32);
                    scale += (c * x.powi(k as i32)).abs();
                }
                prop_assert!((v / scale).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn blaschke_products_are_unimodular(
        zeros in prop::collection::vec((0.05f64..0.9, 0.0f64..1.0), 2..=5),
        rotation in 0.0f64..1.0,
        t in prop::collection::vec(0.0f64..1.0, 20),
    ) {
        let zs: Vec<C64> = zeros.iter().map(|&(r, a)| C64::from_polar(r, 2.0 * std::f64::consts::PI * a)).collect();
        let b = BlaschkeProduct::new(zs, Vec::new(), rotation, false).unwrap();
        for s in t {
            let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * s);
            prop_assert!((b.eval(z).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn quotients_keep_the_degree(a in prop::collection::vec(-0.8f64..0.8, 1..=3), orientation in prop::bool::ANY) {
        // circle-Julia normal forms are odd, so both quotients apply
        let zs: Vec<C64> = a.iter().flat_map(|&x| [C64::new(x, 0.0), C64::new(-x, 0.0)]).collect();
        let b = circle_julia_normal_form(&zs, if orientation { 1 } else { -1 }).unwrap();
        let g = cayley(&b).unwrap();
        for mode in [QuotientMode::Joukowsky, QuotientMode::Square] {
            if let Ok(q) = joukowsky_quotient(&g, mode) {
                prop_assert!(q.residual < 1e-8);
                prop_assert_eq!(q.map.degree(), g.degree());
            }
        }
    }

    #[test]
    fn family_estimates_stay_in_range(c in -3.0f64..1.0, lambda in 0.05f64..0.95, delta in 0.0f64..0.09) {
        let rows = [
            (FamilySpec::quadratic(), vec![c]),
            (FamilySpec::lattes_legendre(), vec![lambda]),
            (FamilySpec::perturbed_power_cover(), vec![3.0, 1.0, delta]),
        ];
        for (spec, params) in rows {
            let r = sweep(&spec, &[params], Estimator::Lap(8), 0.02);
            let row = &r.rows[0];
            let (Some(e), Some(label)) = (row.estimate, row.label) else { continue };
            let lo = (label.circle_degree.unsigned_abs().max(1) as f64).ln() - 0.05;
            let hi = (label.algebraic_degree as f64).ln() + 0.05;
            prop_assert!(lo <= e.value && e.value <= hi, "{}: {} outside [{}, {}]", spec.name, e.value, lo, hi);
        }
    }

    #[test]
    fn second_iterate_doubles_entropy(c in -2.6f64..0.2) {
        let f = quadratic(c);
        let h1 = lap_entropy(&f, 10).unwrap().value;
        let h2 = lap_entropy(&f.iterate(2).unwrap(), 5).unwrap().value;
        prop_assert!((h2 - 2.0 * h1).abs() < 0.05, "{} vs 2*{}", h2, h1);
    }

    #[test]
    fn kneading_matches_laps(c in -2.4f64..-1.2, a in -1.5f64..1.5) {
        let maps = [
            quadratic(c),
            RealRationalMap::from_f64(&[a, -3.0, 0.0, 1.0], &[1.0]).unwrap(),
        ];
        for f in &maps {
            let Ok(k) = realdyn::kneading::algebraic_entropy(f).map(|e| e.value) else { continue };
            let l = lap_entropy_within_budget(f, 12, POINT_BUDGET).unwrap();
            prop_assert!(k <= l.upper + 1e-9, "kneading {} above bracket {}", k, l.upper);
            if k > 0.0 {
                // near windows the fit still overshoots at this depth
                prop_assert!(l.value - k > -0.03 && l.value - k < 0.08, "kneading {} lap {}", k, l.value);
            } else {
                // polynomial lap growth: the step ratios keep falling
                let laps = lap_counts(f, 12).unwrap();
                let ratios: Vec<f64> = laps[5..].windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
                prop_assert!(ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", laps);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn blaschke_degree_matches_crossings(
        inside in prop::collection::vec(0.05f64..0.9, 0..=3),
        outside in prop::collection::vec(1.12f64..10.0, 0..=3),
        half_turn in prop::bool::ANY,
        flip in prop::bool::ANY,
    ) {
        prop_assume!(inside.len() + outside.len() >= 2);
        let ins: Vec<C64> = inside.iter().map(|&r| C64::new(r, 0.0)).collect();
        let outs: Vec<C64> = outside.iter().map(|&r| C64::new(-r, 0.0)).collect();
        let k = ins.len() as i64;
        let d = (ins.len() + outs.len()) as i64;
        let b = BlaschkeProduct::new(ins, outs, if half_turn { 0.5 } else { 0.0 }, flip).unwrap();
        let want = if flip { d - 2 * k } else { 2 * k - d };
        prop_assert_eq!(circle_degree_of(&b), want);
        prop_assert_eq!(topological_degree(&cayley(&b).unwrap()).unwrap(), want);
    }
}

#[test]
fn covering_fallback_is_exact() {
    for (d, s) in [(2usize, 2i64), (3, 1), (3, -3), (4, 2), (5, -1), (5, 3)] {
        let f = cayley(&perturbed_power_cover(d, s, 0.05).unwrap()).unwrap();
        let e = lap_entropy_within_budget(&f, 8, POINT_BUDGET).unwrap();
        let want = (s.unsigned_abs().max(1) as f64).ln();
        assert_eq!(e.value, want, "({d}, {s})");
        assert_eq!((e.lower, e.upper), (want, want));
    }
}
