//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qwzmem::memory::{
    coincidence_test, decode_joint, decode_quench_mass, estimate_period, flip_times,
    measure_period, scan_period_with, vorticity_series, BranchHint, ScanSettings,
};
use qwzmem::quench::{
    default_t_max, evolve_field, evolve_spinor, loschmidt_closed_form, loschmidt_pointwise,
    loschmidt_series, QuenchProtocol,
};
use qwzmem::topology::{
    chern_fhs, chern_patchwise, chern_patchwise_with_radius, gauge_transition_phase,
    hall_conductance, winding_number, wrap_angle, WindingLoop,
};
use qwzmem::{
    ground_state, ground_state_field_masked, r_vector, Gauge, KGrid, MomentumPoint, Spinor,
};

const SCAN_MASSES: [f64; 6] = [-1.5, -1.0, -0.5, 0.5, 1.0, 1.5];
const N_SIDE: usize = 100;
const DT: f64 = 0.01;

type Criterion = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn grid() -> KGrid {
    KGrid::new(N_SIDE).unwrap()
}

fn settings(probe: MomentumPoint) -> ScanSettings {
    ScanSettings::new(3.0, grid(), probe)
}

fn series(m_quench: f64, probe: MomentumPoint, tau: f64) -> qwzmem::memory::VorticitySeries {
    let g = grid();
    let p = QuenchProtocol::new(3.0, m_quench, default_t_max(m_quench, probe).unwrap(), DT)
        .unwrap()
        .with_quench_time(tau)
        .unwrap();
    vorticity_series(&p, g, probe, g.spacing()).unwrap()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let masses = [3.0, 1.0, -1.0, -3.0];
    let expected = [0, -1, -1, 0];
    let mut ok = true;
    let mut got = Vec::new();
    for (m, e) in masses.iter().zip(expected) {
        let cp = chern_patchwise(*m, grid()).unwrap();
        let cf = chern_fhs(&ground_state_field_masked(*m, grid(), Gauge::Patched)).unwrap();
        ok &= cp == e && cf == e;
        got.push(format!("m={m}: {cp}/{cf} (want {e})"));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        ok && secs < 5.0,
        format!("patchwise/plaquette {}; {secs:.2}s", got.join(", ")),
    )
}

fn criterion_2() -> Verdict {
    let ok = [-1, 0, 1]
        .iter()
        .all(|&c| hall_conductance(c) == -(c as f64));
    verdict(ok, "σxy(C) = −C for C ∈ {−1, 0, 1}")
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for probe in [MomentumPoint::M, MomentumPoint::GAMMA] {
        for row in scan_period_with(&settings(probe), &SCAN_MASSES) {
            match row.ratio() {
                Some(r) => {
                    worst = worst.max((r - 1.0).abs());
                    ok &= (r - 1.0).abs() <= 0.02;
                }
                None => ok = false,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        ok && secs < 120.0,
        format!("12 rows, worst |ratio − 1| = {worst:.4}; {secs:.1}s"),
    )
}

fn criterion_4() -> Verdict {
    let near = measure_period(&settings(MomentumPoint::M), -1.99);
    let far = measure_period(&settings(MomentumPoint::M), -1.0).unwrap();
    let (m_ok, m_detail) = match near {
        Ok(p) => {
            let ratio = p.period / far.period;
            (ratio > 100.0, format!("(π,π) ratio {ratio:.2}"))
        }
        Err(e) => (false, format!("(π,π) at m' = −1.99: {e}")),
    };
    let g = measure_period(&settings(MomentumPoint::GAMMA), -1.99).unwrap();
    let want = PI / (-1.99f64 - 2.0).abs();
    let g_err = (g.period / want - 1.0).abs();
    verdict(
        m_ok && g_err <= 0.02,
        format!(
            "{m_detail} (need > 100); (0,0) period {:.5} vs {want:.5}",
            g.period
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [1.0, -1.0] {
        let p =
            QuenchProtocol::new(3.0, m, default_t_max(m, MomentumPoint::M).unwrap(), DT).unwrap();
        let v = vorticity_series(&p, grid(), MomentumPoint::M, grid().spacing()).unwrap();
        let l = loschmidt_series(&p, MomentumPoint::M).unwrap();
        match coincidence_test(&l, &v) {
            Ok(c) => {
                let this = !c.matched_pairs.is_empty() && c.max_offset <= 2.0 * DT;
                ok &= this;
                parts.push(format!(
                    "m'={m}: {} flips, max offset {:.3}",
                    c.matched_pairs.len(),
                    c.max_offset
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("m'={m}: {e}"));
            }
        }
    }
    verdict(ok, parts.join("; "))
}

fn hermitian_exp(m_quench: f64, k: MomentumPoint, t: f64, psi: &Spinor) -> [Complex64; 2] {
    let r = r_vector(m_quench, k);
    let h = Matrix2::new(
        Complex64::new(r.rz, 0.0),
        Complex64::new(r.rx, -r.ry),
        Complex64::new(r.rx, r.ry),
        Complex64::new(-r.rz, 0.0),
    );
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t)));
    let u = v * d * v.adjoint();
    let x = u * nalgebra::Vector2::new(psi.c1, psi.c2);
    [x[0], x[1]]
}

fn criterion_6() -> Verdict {
    let mut rng = StdRng::seed_from_u64(6);
    let mut l_err: f64 = 0.0;
    let mut u_err: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(-4.0..4.0);
        let mq = rng.gen_range(-4.0..4.0);
        let k = MomentumPoint::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let t = rng.gen_range(0.0..50.0);
        if r_vector(m, k).norm() < 1e-6 {
            continue;
        }
        let l = loschmidt_pointwise(m, mq, k, t, Gauge::Patched).unwrap();
        let c = loschmidt_closed_form(m, mq, k, t).unwrap();
        l_err = l_err.max((l - c).norm());
        let psi = ground_state(m, k, Gauge::Patched).unwrap();
        let a = evolve_spinor(&psi, mq, k, t);
        let b = hermitian_exp(mq, k, t, &psi);
        u_err = u_err.max((a.c1 - b[0]).norm()).max((a.c2 - b[1]).norm());
    }
    verdict(
        l_err <= 1e-10 && u_err <= 1e-12,
        format!("max |L − closed form| = {l_err:.2e}, max |U − eig exp| = {u_err:.2e}"),
    )
}

fn criterion_7() -> Verdict {
    let g = grid();
    let mut fails = Vec::new();
    // unitarity and |L| ≤ 1 on every quench of criteria 3–5
    let mut quenches: Vec<f64> = SCAN_MASSES.to_vec();
    quenches.push(-1.99);
    let mut norm_err: f64 = 0.0;
    let mut l_max: f64 = 0.0;
    for &mq in &quenches {
        let p = QuenchProtocol::new(3.0, mq, 200.0, DT).unwrap();
        for t in [0.0, 17.3, 99.99, 200.0] {
            for s in evolve_field(&p, g, t).field.spinors() {
                norm_err = norm_err.max((s.norm_sqr() - 1.0).abs());
            }
        }
        for probe in [MomentumPoint::M, MomentumPoint::GAMMA] {
            let l = loschmidt_series(&p, probe).unwrap();
            l_max = l.values.iter().map(|v| v.norm()).fold(l_max, f64::max);
        }
    }
    if norm_err > 1e-12 {
        fails.push(format!("norm error {norm_err:.2e}"));
    }
    if l_max > 1.0 + 1e-12 {
        fails.push(format!("|L| max {l_max}"));
    }
    // exact-integer windings and radius independence
    let mut frac: f64 = 0.0;
    for m in [3.0, 1.0, -1.0, -3.0] {
        let f = ground_state_field_masked(m, g, Gauge::Patched);
        for c in MomentumPoint::HIGH_SYMMETRY {
            let mut ws = Vec::new();
            for r in [0.2, 0.3, 0.5] {
                let lp = WindingLoop::circle(g, c, r).unwrap();
                let phases: Vec<f64> = lp
                    .nodes()
                    .map(|(ix, iy)| gauge_transition_phase(f.get(ix, iy).unwrap()).xi_ba)
                    .collect();
                let n = phases.len();
                let total: f64 = (0..n)
                    .map(|i| wrap_angle(phases[(i + 1) % n] - phases[i]))
                    .sum();
                let w = winding_number(&f, &lp).unwrap();
                frac = frac.max((total / TAU - w as f64).abs());
                ws.push(w);
            }
            if ws.iter().any(|&w| w != ws[0]) {
                fails.push(format!("m={m} {c}: windings {ws:?}"));
            }
        }
        let cs: Vec<i32> = [0.2, 0.3, 0.5]
            .iter()
            .map(|&r| chern_patchwise_with_radius(m, g, r).unwrap())
            .collect();
        if cs.iter().any(|&c| c != cs[0]) {
            fails.push(format!("m={m}: patchwise over radii {cs:?}"));
        }
    }
    if frac > 1e-9 {
        fails.push(format!("winding off-integer by {frac:.2e}"));
    }
    // gauge invariance of the plaquette Chern number
    let mut rng = StdRng::seed_from_u64(7);
    for m in [3.0, 1.0, -1.0, -3.0] {
        let f = ground_state_field_masked(m, g, Gauge::Patched);
        let c0 = chern_fhs(&f).unwrap();
        for _ in 0..5 {
            let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
            let h = g.spacing();
            let r = f.regauged(|ix, iy| {
                let (x, y) = (ix as f64 * h, iy as f64 * h);
                a[0] * x.sin() + a[1] * y.cos() + a[2] * (x + y).sin() + a[3] * (2.0 * x - y).cos()
            });
            let c1 = chern_fhs(&r).unwrap();
            if c1 != c0 {
                fails.push(format!("m={m}: FHS {c0} → {c1} after regauging"));
            }
        }
    }
    let ok = fails.is_empty();
    verdict(
        ok,
        if ok {
            format!(
                "norms within {norm_err:.1e}, max |L| = {l_max}, windings integral to {frac:.1e}"
            )
        } else {
            fails.join("; ")
        },
    )
}

fn criterion_8() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut worst_joint: f64 = 0.0;
    let mut errors = Vec::new();
    for m in SCAN_MASSES {
        let a = series(m, MomentumPoint::M, 0.0);
        let b = series(m, MomentumPoint::GAMMA, 0.0);
        match decode_quench_mass(&a, MomentumPoint::M, Some(BranchHint::Above)) {
            Ok(d) => worst = worst.max((d.m_quench.value() / m - 1.0).abs()),
            Err(e) => errors.push(format!("m'={m}: {e}")),
        }
        let pa = estimate_period(&flip_times(&a), a.dt).unwrap();
        let pb = estimate_period(&flip_times(&b), b.dt).unwrap();
        match decode_joint((&pa, a.probe), (&pb, b.probe)) {
            Ok(d) => worst_joint = worst_joint.max((d.m_quench.value() / m - 1.0).abs()),
            Err(e) => errors.push(format!("joint m'={m}: {e}")),
        }
    }
    let ok = errors.is_empty() && worst <= 0.02 && worst_joint <= 0.02;
    verdict(
        ok,
        format!(
            "worst relative error: hinted {worst:.4}, joint {worst_joint:.4}{}",
            if errors.is_empty() {
                String::new()
            } else {
                format!("; {}", errors.join("; "))
            }
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for m in [1.0, -1.0] {
        let base = flip_times(&series(m, MomentumPoint::M, 0.0));
        for tau in [0.3, 1.7] {
            let late = flip_times(&series(m, MomentumPoint::M, tau));
            ok &= late.len() >= 3;
            for (a, b) in base.iter().zip(&late) {
                worst = worst.max((b - a - tau).abs());
            }
        }
    }
    verdict(
        ok && worst <= DT,
        format!("max |Δflip − τ| = {worst:.2e} (dt = {DT})"),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("Chern phase diagram", criterion_1),
        ("Kubo mapping", criterion_2),
        ("period law", criterion_3),
        ("near-critical divergence", criterion_4),
        ("Loschmidt/vorticity coincidence", criterion_5),
        ("oracle equivalence", criterion_6),
        ("invariant suite", criterion_7),
        ("memory round-trip", criterion_8),
        ("phase encoding", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
