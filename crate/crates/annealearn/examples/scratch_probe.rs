use annealearn::adjoint::{gradient, loss};
use annealearn::propagate::run_forward;
use annealearn::qops::QubitCount;
use annealearn::schedule::{BetaRamp, ScheduleSet};
use annealearn::states::{flat_state, ghz_state};

fn main() {
    let n = QubitCount::new(2).unwrap();
    let t = 2000usize;
    let dt = 2.5;
    let mut s = ScheduleSet::annealing_init(n, t, dt, 1.5e-3, 0.5).unwrap();
    let ramp = BetaRamp { beta_f: 2500.0, t_f: 5000.0 };
    let rho0 = flat_state(n);
    let des = ghz_state(n).unwrap();
    let eta = 1.25e-5;
    for epoch in 0..12 {
        let traj = match run_forward(&rho0, &s, &ramp) {
            Ok(t) => t,
            Err(e) => { println!("epoch {epoch}: forward failed: {e}"); return; }
        };
        let rep = loss(&traj, &des).unwrap();
        let g = match gradient(&traj, &s, &ramp, &des) {
            Ok(g) => g,
            Err(e) => { println!("epoch {epoch}: gradient failed: {e}"); return; }
        };
        let gmax = g.max_abs();
        let glast = g.d_zeta[0][t-1];
        let gmid = g.d_zeta[0][t/4];
        let zlast = s.zeta()[0][t-1];
        println!("epoch {epoch}: loss {:.6e} rms {:.6e} |g|max {:.3e} g[last] {:.3e} g[T/4] {:.3e} zeta[last] {:.3e}", rep.loss, rep.rms, gmax, glast, gmid, zlast);
        let mut updated: Vec<Vec<f64>> = s.zeta().to_vec();
        for (series, grads) in updated.iter_mut().zip(&g.d_zeta) {
            for (w, dg) in series.iter_mut().zip(grads) { *w -= eta * dg; }
        }
        for (p, series) in updated.into_iter().enumerate() {
            s.set_zeta_series(p, series).unwrap();
        }
    }
}
