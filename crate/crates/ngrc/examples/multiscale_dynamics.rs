//! Inspect the three-scale dynamics directly: field magnitudes after the
//! transient, and the divergence of two trajectories that start 1e-8 apart
//! (the chaos that makes long forecasts impossible).
//!
//!     cargo run --release --example multiscale_dynamics

use ngrc::lorenz96::{default_init, rk4_step, ModelParams};

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ModelParams::three_scale(8, 8, 8, 20.0);
    let h = 0.001;

    let mut state = default_init(&params);
    for _ in 0..10_000 {
        state = rk4_step(&state, &params, h)?;
    }
    println!(
        "after 10 MTU transient: rms x = {:.3}, rms y = {:.3}, rms z = {:.4}",
        rms(&state.x),
        rms(&state.y),
        rms(&state.z)
    );

    let mut twin = state.clone();
    twin.x[0] += 1e-8;
    println!("twin trajectory perturbed by 1e-8 in x_1:");
    for step in 1..=4000 {
        state = rk4_step(&state, &params, h)?;
        twin = rk4_step(&twin, &params, h)?;
        if step % 500 == 0 {
            let dist: f64 = state
                .x
                .iter()
                .zip(&twin.x)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            println!("  t = {:.1} MTU   |x - x'| = {dist:.3e}", step as f64 * h);
        }
    }
    Ok(())
}
