use skgw_core::*;
use skgw_core::hartree::*;
use skgw_core::model::*;
use skgw_core::rng::CounterRng;

fn main() {
    for (l, n) in [(256.0, 4096usize)] {
        for kk in [2.0, 3.0] {
            for delta in [0.5, 0.3, 0.2] {
                let grid = build_grids(&ModelParams {
                    box_half_length: l, grid_size: n,
                    cutoff: CutoffSpec { radius: kk, amplitude: 1.0 },
                    ..ModelParams::default() }).unwrap();
                let mut rng = CounterRng::new(7);
                let r = minimize(&grid, delta, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng).unwrap();
                for count in [2usize, 3] {
                    let dict = make_test_dictionary(&grid, (1.0, kk), count).unwrap();
                    let mut line = format!("K={kk} delta={delta} count={count}: ");
                    for t in [120.0, 180.0, 240.0, 280.0] {
                        let mut worst = 0.0f64;
                        for e in &dict.elements {
                            let mut p = C64::new(0.0, 0.0);
                            for j in 0..grid.len() {
                                if e.samples[j].norm_sqr() > 0.0 {
                                    p += e.samples[j].conj() * C64::from_polar(1.0, t * grid.omega[j]) * r.z0[j];
                                }
                            }
                            worst = worst.max((p * grid.dk).norm());
                        }
                        line += &format!("T{t}:{:.1e} ", worst);
                    }
                    println!("{line}");
                }
            }
        }
    }
}
