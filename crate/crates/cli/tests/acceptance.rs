//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use gcs_core::coherent::{bgcs, gpcs, gpcs_from, mucs, CoherentSeries};
use gcs_core::dynamics::{fidelity, fidelity_double_sum, fidelity_envelope};
use gcs_core::ladder::{gamma_n, hw_f_sequence, LadderSpec, Weight};
use gcs_core::numeric::golden_section_max;
use gcs_core::observables::{
    current_density, mean_energy_closed_form, mean_energy_oracle, probability_density, zp_moments_closed_form,
    zp_moments_oracle,
};
use gcs_core::oscillator::QuadratureGrid;
use gcs_core::spinors::energy;
use gcs_core::verify::{intertwiner_fd, schrodinger_fd, SusyLayer};
use gcs_core::{Complex64, LayerKind, UnitSystem};

const KINDS: [LayerKind; 2] = [LayerKind::Monolayer, LayerKind::Bilayer];
/// Bilayer fidelity maximum next to 2π at r = 5, from a 50-digit double sum.
const REVIVAL_F: f64 = 0.999_994_393_578_94;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn osc_state(kind: LayerKind, r: f64, th: f64) -> CoherentSeries {
    bgcs(&LadderSpec::oscillator(), kind, Complex64::from_polar(r, th), 1e-12).unwrap()
}

fn hw_fixed_point() -> Outcome {
    let f = hw_f_sequence(|n| n as f64, |n| (n + 1) as f64, 500).map_err(|e| e.to_string())?;
    let dev = (1..=500).map(|n| (f.value(n) - 1.0).abs()).fold(0.0, f64::max);
    let spec = LadderSpec::oscillator_with(f, vec![]).map_err(|e| e.to_string())?;
    let gap = (0..500)
        .map(|n| (gamma_n(&spec, n + 1) - gamma_n(&spec, n) - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(dev < 1e-10 && gap < 1e-10, format!("max |f-1| = {dev:.2e}, max |Δγ-1| = {gap:.2e}"))
}

fn definition_equivalence() -> Outcome {
    let spec = LadderSpec::oscillator();
    let mut worst = 0.0f64;
    let mut same_len = true;
    for kind in KINDS {
        for r in [0.5, 1.0, 3.0, 5.0] {
            for th in [0.0, PI / 4.0] {
                let a = Complex64::from_polar(r, th);
                let (b, g, m) = (
                    bgcs(&spec, kind, a, 1e-12).unwrap(),
                    gpcs(&spec, kind, a, 1e-12).unwrap(),
                    mucs(&spec, kind, a, 1e-12).unwrap(),
                );
                same_len &= b.n_max() == g.n_max() && g.n_max() == m.n_max();
                for n in 0..=b.n_max() {
                    worst = worst
                        .max((b.coefficient(n) - g.coefficient(n)).norm())
                        .max((b.coefficient(n) - m.coefficient(n)).norm());
                }
            }
        }
    }
    ensure(same_len && worst < 1e-12, format!("max coefficient difference {worst:.2e} over 16 configs"))
}

fn eigenvector_property() -> Outcome {
    let spec = LadderSpec::oscillator();
    let mut worst = 0.0f64;
    for kind in KINDS {
        for r in [0.5, 1.0, 3.0, 5.0] {
            for th in [0.0, PI / 4.0] {
                let s = bgcs(&spec, kind, Complex64::from_polar(r, th), 1e-12).unwrap();
                // (A^- a)_n = sqrt(p_{n+1}) f(n+1) a_{n+1}, available for n < N
                let err = (0..s.n_max())
                    .map(|n| {
                        let down = s.coefficient(n + 1) * (spec.p(n + 1).sqrt() * spec.f(n + 1));
                        (down - s.alpha() * s.coefficient(n)).norm()
                    })
                    .fold(0.0, f64::max);
                worst = worst.max(err / (10.0 * s.tail_bound()));
            }
        }
    }
    ensure(worst < 1.0, format!("max error / (10 tail_bound) = {worst:.2e}"))
}

fn normalization_and_symmetry() -> Outcome {
    let u = UnitSystem::unit();
    let (mut norm, mut rho, mut jx, mut jy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for kind in KINDS {
        for r in [1.0, 3.0, 5.0] {
            for th in [0.4, 1.3, 2.9] {
                let (p, m) = (osc_state(kind, r, th), osc_state(kind, r, -th));
                let grid = QuadratureGrid::for_state(&u, r);
                let xs = grid.points();
                let dp = probability_density(&p, &xs, &u).unwrap();
                norm = norm.max((grid.integrate_values(&dp.values) - 1.0).abs());
                let probe: Vec<f64> = xs.iter().step_by(40).copied().collect();
                let (a, b) = (probability_density(&p, &probe, &u).unwrap(), probability_density(&m, &probe, &u).unwrap());
                let ((ax, ay), (bx, by)) = (current_density(&p, &probe, &u).unwrap(), current_density(&m, &probe, &u).unwrap());
                for i in 0..probe.len() {
                    rho = rho.max((a.values[i] - b.values[i]).abs());
                    jx = jx.max((ax.values[i] + bx.values[i]).abs());
                    jy = jy.max((ay.values[i] - by.values[i]).abs());
                }
            }
        }
    }
    ensure(
        norm < 1e-6 && rho < 1e-12 && jx < 1e-12 && jy < 1e-12,
        format!("|∫ρ-1| = {norm:.2e}, ρ asym = {rho:.2e}, Jx even part = {jx:.2e}, Jy odd part = {jy:.2e}"),
    )
}

fn moments_and_uncertainty() -> Outcome {
    let (mut diff, mut low, mut at0, mut at5) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    for kind in KINDS {
        for i in 0..=20 {
            let r = 0.25 * i as f64;
            for th in [0.0, PI / 4.0, PI / 2.0, 2.0, PI] {
                let s = osc_state(kind, r, th);
                let (c, o) = (zp_moments_closed_form(kind, s.alpha()), zp_moments_oracle(&s));
                for (x, y) in [(c.mean_z, o.mean_z), (c.mean_z2, o.mean_z2), (c.mean_p, o.mean_p), (c.mean_p2, o.mean_p2)] {
                    diff = diff.max((x - y).abs());
                }
                let p = o.uncertainty_product();
                low = low.min(p).min(c.uncertainty_product());
                if i == 0 {
                    at0 = at0.max((p - 0.5).abs());
                }
                if i == 20 {
                    at5 = at5.max((p - 0.5).abs());
                }
            }
        }
    }
    ensure(
        diff < 1e-8 && low >= 0.5 - 1e-10 && at0 < 1e-10 && at5 < 2e-2,
        format!("closed vs oracle {diff:.2e}, min product {low:.6}, |p-1/2| at 0: {at0:.2e}, at r=5: {at5:.2e}"),
    )
}

fn mean_energy() -> Outcome {
    let u = UnitSystem::unit();
    let (mut oracle, mut phase) = (0.0f64, 0.0f64);
    for kind in KINDS {
        for i in 0..=10 {
            let r = 0.5 * i as f64;
            let closed = mean_energy_closed_form(kind, r, &u);
            let base = mean_energy_oracle(&osc_state(kind, r, 0.0), &u);
            for th in [0.0, PI / 3.0, PI, -2.0] {
                let s = osc_state(kind, r, th);
                // independent direct sum over |a_n|² E_n
                let direct: f64 = s.terms().map(|(n, a)| a.norm_sqr() * energy(kind, n, &u)).sum();
                oracle = oracle.max((closed - direct).abs());
                phase = phase.max((mean_energy_oracle(&s, &u) - base).abs());
            }
        }
    }
    ensure(oracle < 1e-10 && phase < 1e-14, format!("closed vs Σ|a_n|²E_n {oracle:.2e}, θ spread {phase:.2e}"))
}

fn fidelity_revival() -> Outcome {
    let mut at0_exact = true;
    let mut sums = 0.0f64;
    for kind in KINDS {
        for r in [0.5, 1.0, 3.0, 5.0] {
            let s = osc_state(kind, r, 0.7);
            at0_exact &= fidelity(&s, 0.0) == 1.0;
            for i in 0..60 {
                let t = 0.5 * i as f64;
                sums = sums.max((fidelity(&s, t) - fidelity_double_sum(&s, t)).abs());
            }
        }
    }
    let s = osc_state(LayerKind::Bilayer, 5.0, 0.0);
    let (t, f) = golden_section_max(|t| fidelity(&s, t), 2.0 * PI - 0.5, 2.0 * PI + 0.5, 1e-8);
    let env = (0..=700)
        .map(|i| 5.8 + 0.001 * i as f64)
        .map(|t| (fidelity(&s, t) - fidelity_envelope(5.0, t)).abs())
        .fold(0.0, f64::max);
    ensure(
        at0_exact && sums < 1e-10 && (t - 2.0 * PI).abs() < 0.1 && (f - REVIVAL_F).abs() < 0.05 && env <= 0.05,
        format!("F(0)=1 exact: {at0_exact}, single vs double {sums:.2e}, max at t = {t:.6} F = {f:.10}, envelope gap {env:.2e}"),
    )
}

fn susy_structure() -> Outcome {
    let u = UnitSystem::unit();
    let (mut order, mut inter) = (f64::INFINITY, f64::INFINITY);
    for n in 0..=10 {
        for layer in [SusyLayer::Monolayer, SusyLayer::Bilayer] {
            order = order.min(schrodinger_fd(layer, n, &u, 0.1).map_err(|e| e.to_string())?.min_order());
        }
        if n > 0 {
            inter = inter.min(intertwiner_fd(n, &u, 0.1).min_order());
        }
    }
    ensure(order >= 1.8 && inter >= 1.8, format!("observed orders: Schrödinger {order:.3}, intertwiner {inter:.3}"))
}

fn root_cases() -> Outcome {
    let f = Weight::func(|n| if n == 2 || n == 5 { 0.0 } else { 1.0 });
    let spec = LadderSpec::oscillator_with(f, vec![2, 5]).map_err(|e| e.to_string())?;
    let a = Complex64::new(1.1, -0.6);
    let b = bgcs(&spec, LayerKind::Monolayer, a, 1e-12).map_err(|e| e.to_string())?;
    let g = gpcs_from(&spec, LayerKind::Bilayer, a, 2, 1e-12).map_err(|e| e.to_string())?;
    let support: Vec<usize> = g.terms().filter(|(_, c)| c.norm() > 0.0).map(|(n, _)| n).collect();
    let lower_zero = (0..5).all(|n| b.coefficient(n) == Complex64::default());
    let norm = (g.norm_sqr() - 1.0).abs();
    ensure(
        b.base_index() == 5 && lower_zero && support == [2, 3, 4] && norm < 1e-12,
        format!("BG starts at {}, GP support {support:?}, |norm-1| = {norm:.2e}", b.base_index()),
    )
}

fn run_examples(out: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut configs: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    for c in &configs {
        let st = Command::new(env!("CARGO_BIN_EXE_gcs"))
            .args(["run", "--config", c.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
            .status()
            .map_err(|e| e.to_string())?;
        if !st.success() {
            return Err(format!("{} exited with {st}", c.display()));
        }
    }
    let mut files = BTreeMap::new();
    for e in std::fs::read_dir(out).map_err(|e| e.to_string())? {
        let p = e.unwrap().path();
        files.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_examples(a.path())?;
    let second = run_examples(b.path())?;
    let differing: Vec<&String> = first.keys().filter(|k| first.get(*k) != second.get(*k)).collect();
    ensure(
        !first.is_empty() && first.len() == second.len() && differing.is_empty(),
        format!("{} output files from 11 configs, differing: {differing:?}", first.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Heisenberg-Weyl fixed point", hw_fixed_point),
        ("definition equivalence", definition_equivalence),
        ("eigenvector property", eigenvector_property),
        ("normalization and symmetry", normalization_and_symmetry),
        ("moments and uncertainty", moments_and_uncertainty),
        ("mean energy", mean_energy),
        ("fidelity and revival", fidelity_revival),
        ("SUSY finite differences", susy_structure),
        ("root cases", root_cases),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
