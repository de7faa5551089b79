use num_complex::Complex64;
use proptest::prelude::*;

use radmhd::config::ModelConfig;
use radmhd::entropy::{
    gibbs_defects, production_density, relative_helmholtz_matter, relative_helmholtz_radiation,
    relative_helmholtz_radiation_diff,
};
use radmhd::linalg::CVec9;
use radmhd::model::{make_ideal_gas_eos, Equilibrium, PhysParams};
use radmhd::propagator::{propagate_mode, random_field, sobolev_norm};
use radmhd::stability::{kalman_rank, sk_check};
use radmhd::symbols::{consistency_audit, SystemMatrices};

fn pos() -> std::ops::Range<f64> {
    0.5..2.0
}

prop_compose! {
    fn model(nu_range: std::ops::Range<f64>)(
        p in prop::array::uniform6(pos()),
        nu in nu_range,
        gas in prop::array::uniform2(pos()),
        state in prop::array::uniform2(pos()),
        b in prop::array::uniform3(-1.5..1.5f64),
    ) -> ModelConfig {
        let params = PhysParams::new(p[0], p[1], p[2], p[3], p[4], p[5], nu).unwrap();
        let b = if b.iter().map(|x| x * x).sum::<f64>() < 0.09 { [1.0, b[1], b[2]] } else { b };
        ModelConfig {
            params,
            eos: make_ideal_gas_eos(gas[0], gas[1]).unwrap(),
            equilibrium: Equilibrium::compatible(&params, state[0], state[1], b).unwrap(),
        }
    }
}

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-3).then(|| v.map(|c| c / n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrized_fluxes_are_symmetric(m in model(0.0..2.0)) {
        let sys = SystemMatrices::from_model(&m).unwrap();
        for at in &sys.at {
            prop_assert!((at - at.transpose()).norm() <= 1e-13 * at.norm());
        }
    }

    #[test]
    fn hyperbolic_symbol_is_linear(
        m in model(0.0..2.0),
        x in prop::array::uniform3(-3.0..3.0f64),
        y in prop::array::uniform3(-3.0..3.0f64),
        s in -2.0..2.0f64,
    ) {
        let sys = SystemMatrices::from_model(&m).unwrap();
        let lhs = sys.a_symbol([s * x[0] + y[0], s * x[1] + y[1], s * x[2] + y[2]]);
        let rhs = sys.a_symbol(x) * s + sys.a_symbol(y);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn dissipation_defect_has_closed_form(m in model(0.0..2.0)) {
        let sys = SystemMatrices::from_model(&m).unwrap();
        let (p, eq) = (m.params, m.equilibrium);
        let expected = p.mu * p.sigma_a * (1.0 / (eq.rho_bar * eq.rho_bar) - 1.0 / (eq.rho_bar * eq.theta_bar)).abs();
        prop_assert!((consistency_audit(&sys).bt.asymmetry_defect - expected).abs() <= 1e-12);
    }

    #[test]
    fn kalman_rank_matches_sk(m in model(0.1..2.0), v in prop::array::uniform3(-1.0..1.0f64)) {
        prop_assume!(unit(v).is_some());
        let xi = unit(v).unwrap();
        let sys = SystemMatrices::from_model(&m).unwrap();
        prop_assert!(sk_check(&sys, xi).unwrap().holds);
        prop_assert_eq!(kalman_rank(&sys, xi), 9);
    }

    #[test]
    fn mode_propagation_is_a_semigroup(
        m in model(0.1..2.0),
        xi in prop::array::uniform3(-3.0..3.0f64),
        re in prop::array::uniform9(-1.0..1.0f64),
        s in 0.0..3.0f64,
        t in 0.0..3.0f64,
    ) {
        let sys = SystemMatrices::from_model(&m).unwrap();
        let u0 = CVec9::from_fn(|i, _| Complex64::new(re[i], 0.5 * re[(i + 4) % 9]));
        let whole = propagate_mode(&sys, &u0, xi, s + t).unwrap();
        let split = propagate_mode(&sys, &propagate_mode(&sys, &u0, xi, s).unwrap(), xi, t).unwrap();
        prop_assert!((whole - split).norm() <= 1e-11 * (1.0 + u0.norm()));
    }

    #[test]
    fn productions_are_nonnegative(
        theta in 0.1..5.0f64,
        tr in 0.1..5.0f64,
        v in prop::array::uniform3(-2.0..2.0f64),
        g in prop::array::uniform12(-2.0..2.0f64),
        m in model(0.0..2.0),
    ) {
        let d = production_density(theta, tr, v, [g[0], g[1], g[2]], [g[3], g[4], g[5]], [g[6], g[7], g[8]], [g[9], g[10], g[11]], &m.params);
        for (name, x) in d.as_array() {
            prop_assert!(x >= 0.0, "{} = {}", name, x);
        }
    }

    #[test]
    fn relative_functionals_are_nonnegative(
        rho in 0.05..10.0f64,
        theta in 0.05..10.0f64,
        m in model(0.0..2.0),
    ) {
        let eq = m.equilibrium;
        prop_assert!(relative_helmholtz_matter(rho, theta, &m.eos, &eq).unwrap() >= -1e-14);
        let r = relative_helmholtz_radiation(theta, m.params.a, eq.theta_bar).unwrap();
        prop_assert!(r >= 0.0);
        let diff = relative_helmholtz_radiation_diff(theta, m.params.a, eq.theta_bar).unwrap();
        let scale = m.params.a * (theta.powi(4) + eq.theta_bar.powi(4));
        prop_assert!((r - diff).abs() <= 1e-12 * scale);
    }

    #[test]
    fn ideal_gas_is_gibbs_consistent(rho in 0.1..10.0f64, theta in 0.1..10.0f64, gas in prop::array::uniform2(pos())) {
        let eos = make_ideal_gas_eos(gas[0], gas[1]).unwrap();
        let (d1, d2) = gibbs_defects(&eos, rho, theta);
        prop_assert!(d1 <= 1e-8 && d2 <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn zeroth_sobolev_norm_is_the_l2_norm(seed in 0u64..1000, q in 0.5..3.0f64) {
        let f = random_field(8, 3.0, q, seed).unwrap();
        let spectral = sobolev_norm(&f, 0.0);
        prop_assert!((spectral - f.l2_norm_direct()).abs() <= 1e-12 * spectral);
    }
}
