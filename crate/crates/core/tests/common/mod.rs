#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radmhd::config::ModelConfig;
use radmhd::model::{make_ideal_gas_eos, Equilibrium, PhysParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Admissible model with every constant in `[0.5, 2]` and `|B_bar| >= 0.3`.
pub fn random_model(rng: &mut ChaCha8Rng, nu: Option<f64>) -> ModelConfig {
    let mut u = || rng.random_range(0.5..2.0);
    let params = PhysParams::new(u(), u(), u(), u(), u(), u(), u()).unwrap();
    let eos = make_ideal_gas_eos(u(), u()).unwrap();
    let (rho, theta) = (u(), u());
    let b = loop {
        let b: [f64; 3] = [
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
        ];
        if (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() >= 0.3 {
            break b;
        }
    };
    let model = ModelConfig {
        params,
        eos,
        equilibrium: Equilibrium::compatible(&params, rho, theta, b).unwrap(),
    };
    match nu {
        Some(nu) => model.with_nu(nu).unwrap(),
        None => model,
    }
}
