use skgw_core::*;
use skgw_core::hartree::*;
use skgw_core::model::*;
use skgw_core::rng::CounterRng;
use skgw_core::scatter::*;

fn main() {
    let grid = build_grids(&ModelParams { box_half_length: 128.0, grid_size: 2048, ..ModelParams::default() }).unwrap();
    let mut rng = CounterRng::new(7);
    let result = minimize(&grid, 0.5, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng).unwrap();
    let state = as_state(&result);
    let scale = skgw_core::linalg::norm_sq(&state.u, grid.dx) + skgw_core::linalg::norm(&state.z, grid.dk);
    println!("threshold = {:.3e}", 1e-6*scale);
    let dict = make_test_dictionary(&grid, (1.0, 2.0), 8).unwrap();
    let refs: Vec<&TestFunction> = dict.elements.iter().collect();
    for dt in [1e-3, 2.5e-4] {
        for t_max in [40.0, 80.0] {
            let opts = ScatterOpts { dt, initial_horizon: t_max, max_horizon: t_max, tol: 1.0, profile_stride: 100 };
            let t1 = std::time::Instant::now();
            let pairings = pair_dictionary(&grid, &state, &refs, Direction::Forward, &opts).unwrap();
            let max_pair = pairings.iter().map(|p| p.value().norm()).fold(0.0, f64::max);
            println!("dt={dt:auto$} T={t_max}: max|P| = {:.3e}   per-xi: {:?}   ({:.0}s)",
                max_pair,
                pairings.iter().map(|p| format!("{:.1e}", p.value().norm())).collect::<Vec<_>>(),
                t1.elapsed().as_secs_f64(), auto=7);
        }
    }
}
