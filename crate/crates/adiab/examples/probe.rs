use adiab::model::StateVector;
use adiab::pdm::{synthesize, verify, PdmConfig, PdmMode};
use adiab::propagator::StepPolicy;
use adiab::scenarios::*;
use adiab::transition::{eq1_residual, traditional_criterion};

fn main() {
    let psi0 = StateVector::basis(2, 1).unwrap();
    let policy = StepPolicy::default();

    println!("=== fig1 counter (LZ, multiple 5) ===");
    let base = lz_base_schedule().unwrap();
    let cfg = PdmConfig::new(PdmMode::Accumulate, 0).with_pause_multiple(5);
    let res = synthesize(&base, &psi0, &cfg, &policy).unwrap();
    let rep = verify(&res, 0.05).unwrap();
    println!("pauses: {}", rep.pause_count);
    println!("total duration: {:.6} (base 15)", rep.total_duration);
    println!("avg speed: {:.6}  max: {}", rep.average_speed, rep.max_speed);
    println!("final pops: {:?}  band {}", rep.final_populations, rep.final_band);
    println!("ita re: {:?}", rep.ita.ita.iter().map(|z| z.re).collect::<Vec<_>>());
    println!("worst ramp margin: {:.3e}", rep.worst_ramp_margin);
    println!("criterion max: {:.8}", rep.criterion_max);
    for (i, e) in res.events.iter().enumerate().take(4) {
        println!("  event {i}: t_base {:.4} dur {:.4}", e.t_base, e.duration);
    }

    println!("\n=== fig1 counter with multiple 1 and 3 (for comparison) ===");
    for m in [1u32, 3] {
        let cfg = PdmConfig::new(PdmMode::Accumulate, 0).with_pause_multiple(m);
        let res = synthesize(&base, &psi0, &cfg, &policy).unwrap();
        let rep = verify(&res, 0.05).unwrap();
        println!(
            "m={m}: pauses {} total {:.4} avg {:.5} final c-^2 {:.6}",
            rep.pause_count, rep.total_duration, rep.average_speed, rep.final_populations[0]
        );
    }

    println!("\n=== fig2 counter (waveguide, multiple 1) ===");
    let wg = waveguide_base_schedule().unwrap();
    let cfg = PdmConfig::new(PdmMode::Accumulate, 0).with_pause_multiple(1);
    let res = synthesize(&wg, &psi0, &cfg, &policy).unwrap();
    let rep = verify(&res, 0.05).unwrap();
    println!("pauses: {}", rep.pause_count);
    println!("hold duration: {:.6} (pi/(2*0.0713) = {:.6})", res.events[0].duration, std::f64::consts::PI / (2.0 * 0.0713));
    println!("total length: {:.4} (base 267.33)", rep.total_duration);
    println!("final pops: {:?} band {}", rep.final_populations, rep.final_band);
    println!("ita re: {:?}", rep.ita.ita.iter().map(|z| z.re).collect::<Vec<_>>());
    println!("criterion max: {:.8}", rep.criterion_max);
    let i_end = res.trace.states.last().unwrap();
    println!("I1(end) = {:.6}, I2(end) = {:.6}", i_end[0].norm_sqr(), i_end[1].norm_sqr());

    println!("\n=== fig2/fig1 adiabatic criterion equality check ===");
    let c_base = traditional_criterion(&base).unwrap();
    let c_pdm = traditional_criterion(&res.schedule).unwrap();
    let c_wg = traditional_criterion(&wg).unwrap();
    println!("wg base criterion:  {:.10}", c_wg.max);
    println!("wg pdm  criterion:  {:.10}", c_pdm.max);
    println!("diff: {:.3e}", (c_wg.max - c_pdm.max).abs());
    println!("lz base criterion: {:.10}", c_base.max);

    println!("\n=== eq1 residuals at default dt ===");
    for (name, run) in [
        ("fig1-adiabatic", scenario_fig1(Fig1Variant::Adiabatic).unwrap()),
        ("fig1-counter", scenario_fig1(Fig1Variant::Counter).unwrap()),
        ("fig2-adiabatic", scenario_fig2(Fig2Variant::Adiabatic).unwrap()),
        ("fig2-counter", scenario_fig2(Fig2Variant::Counter).unwrap()),
    ] {
        let r = eq1_residual(&run.trace).unwrap();
        println!("{name}: residual {:.3e}  dt {:.3e}  samples {}", r, run.trace.dt, run.trace.len());
    }
}
