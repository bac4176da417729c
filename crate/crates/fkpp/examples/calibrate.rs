use fkpp::*;

fn main() {
    let opts = SolverOptions::default();

    // 1) G(mu) landscape, c=2, kappa=1
    println!("== G(mu) landscape ==");
    for i in 0..26 {
        let mu = 10f64.powf(-4.0 + 5.0 * i as f64 / 25.0);
        let n = auto_grid_n(1024, mu);
        let g = Grid::new(n).unwrap();
        match maximize_over_crenels(mu, 2.0, 1.0, g, &opts) {
            Ok((ell, gv)) => println!("mu={mu:.6e} n={n} ell*={ell:.5} G={gv:.8e}"),
            Err(e) => println!("mu={mu:.6e} n={n} FAILED {e}"),
        }
    }

    // 2) Richardson convergence of the crenel objective integral
    println!("== convergence of ∫theta, crenel(0.5), mu=0.05 ==");
    let m = ResourceProfile::crenel(0.5, 1.0).unwrap();
    let mut prev = None;
    for p in 9..=16 {
        let n = 1usize << p;
        let g = Grid::new(n).unwrap();
        let s = solve_state(&m, 0.05, g, &opts).unwrap();
        let v = s.theta.integrate();
        let diff = prev.map(|pv: f64| pv - v).unwrap_or(0.0);
        println!("n=2^{p} I={v:.12e} diff_prev={diff:.3e} res={:.2e} iters={}", s.residual_norm, s.iterations);
        prev = Some(v);
    }

    // 3) theta' near x=0.5 for the k=4 tile of crenel(0.4), k^2 mu = 0.25
    println!("== theta' near 0.5, 4-tile ==");
    let p4 = ResourceProfile::crenel(0.4, 1.0).unwrap();
    let t4 = tile_k_symmetric(&p4, 4).unwrap();
    let g = Grid::new(2048).unwrap();
    let s = solve_state(&t4, 0.25 / 16.0, g, &opts).unwrap();
    let d = s.theta.derivative();
    let maxd = d.max_abs();
    println!("max|theta'| = {maxd:.4e}");
    for i in (960..=1090).step_by(5) {
        println!("x={:.5} theta={:.8e} theta'={:.4e}", g.node(i), s.theta.values()[i], d.values()[i]);
    }
    match critical_points(&s, DEFAULT_TOL_DERIV) {
        Ok(a) => println!("critical points: {a:?}"),
        Err(e) => println!("critical points error: {e}"),
    }
}
