fn main() {
    let pr = fracsym::fkdvb::FkdvbParams::new(0.5, 0.3, 1.7).unwrap();
    let problem = fracsym::reduce::ReducedProblem::default_for(pr).unwrap();
    let t0 = std::time::Instant::now();
    let cand = fracsym::reduce::solve_reduced(&problem).unwrap();
    println!("solve: {:?}  residual_norm = {:.3e}  converged = {}  iters = {}",
             t0.elapsed(), cand.residual_norm, cand.converged, cand.iterations);
    println!("coeffs: {:?}", cand.coefficients.iter().map(|c| (c*1e4).round()/1e4).collect::<Vec<_>>());
    let u = fracsym::reduce::reconstruct_power_sum(&cand.profile().unwrap(), &pr).unwrap();
    let t0 = std::time::Instant::now();
    let (c, f, ratio) = fracsym::reduce::verify_2d_refinement(
        &u, &pr,
        fracsym::reduce::DEFAULT_VERIFY_WIN1,
        fracsym::reduce::DEFAULT_VERIFY_WIN2,
        65, 65).unwrap();
    println!("verify: {:?}  coarse L_inf = {:.3e}  fine = {:.3e}  ratio = {:.2}", t0.elapsed(), c.l_inf, f.l_inf, ratio);
    println!("coarse L2 = {:.3e}", c.l2);
    // tracking vs residual_norm at higher resolution
    let t0 = std::time::Instant::now();
    let rep = fracsym::reduce::verify_2d(&u, &pr,
        fracsym::reduce::DEFAULT_VERIFY_WIN1,
        fracsym::reduce::DEFAULT_VERIFY_WIN2, 257, 257).unwrap();
    println!("verify 257: {:?}  L_inf = {:.3e}  (10x residual_norm = {:.3e})", t0.elapsed(), rep.l_inf, 10.0*cand.residual_norm);
}
