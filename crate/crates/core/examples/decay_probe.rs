use skgw_core::*;
use skgw_core::model::*;
use skgw_core::scatter::*;
use skgw_core::skg::*;

fn main() {
    // acceptance-scale configuration for dispersive decay fits
    let grid = build_grids(&ModelParams { box_half_length: 128.0, grid_size: 2048, ..ModelParams::default() }).unwrap();
    let dict = make_test_dictionary(&grid, (1.0, 2.0), 5).unwrap();
    let u = normalized_to(&grid, &gaussian_packet(&grid, 0.5, 1.0, 1.0, 0.4), 0.5);
    let z: Vec<C64> = grid.k.iter().map(|&k| C64::new(0.3*(-2.0*(k-1.4)*(k-1.4)).exp(), 0.1*(-2.0*(k+1.2)*(k+1.2)).exp())).collect();
    let state = ClassicalState::new(u, z);
    let opts = ScatterOpts::default();
    for xi in &dict.elements {
        let t0 = std::time::Instant::now();
        let prof = decay_profile(&grid, &state, xi, 80.0, Direction::Forward, &opts).unwrap();
        // also fit over the acceptance window [10, 80]
        let peak = prof.magnitude.iter().cloned().fold(0.0, f64::max);
        println!("{}: fitted p (window [20,80]) = {:.3}, peak |g| = {:.3e}, g(80) ~ {:.3e}  ({:.1}s)",
            xi.label, prof.fitted_exponent, peak, prof.magnitude.last().unwrap(), t0.elapsed().as_secs_f64());
    }
    // two-route + tails on the same grid
    let refs: Vec<&TestFunction> = dict.elements.iter().collect();
    let t0 = std::time::Instant::now();
    let pairings = pair_dictionary(&grid, &state, &refs, Direction::Forward, &ScatterOpts { initial_horizon: 10.0, max_horizon: 80.0, tol: 1e-6, ..Default::default() }).unwrap();
    for p in &pairings {
        println!("{}: T={} |value|={:.4e} tail={:.3e} exp={:.2} gap-two-route={:.3e} cauchy={:.3e}",
            p.label, p.horizon, p.value().norm(), p.tail_bound, p.fitted_exponent,
            (p.value()-p.proxy()).norm(), p.cauchy_gap);
    }
    println!("pair_dictionary took {:.1}s", t0.elapsed().as_secs_f64());
}
