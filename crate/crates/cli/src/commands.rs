use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use subchan::channel::{verify_channel_seeded, DEFAULT_VERIFY_SEED};
use subchan::{
    average_fidelity_closed, average_fidelity_quadrature, fixed_point_space, format, invariant_hull_check,
    optimize_encoding_with, unitality_check, FockOperator, KrausChannel, OptimizerConfig, Subspace,
};

use crate::numfmt::g;
use crate::{ChannelArgs, ChannelKind, Command, EncodingArgs, Failure, DEFAULT_DIM};

type Out<'a> = &'a mut dyn Write;
type Outcome = Result<(), Failure>;

fn io(e: std::io::Error) -> Failure {
    Failure::Domain(format!("write failed: {e}"))
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn run(command: Command, out: Out) -> Outcome {
    match command {
        Command::Fidelity { channel, encoding, quadrature, nodes } => {
            fidelity(&channel, &encoding, quadrature, nodes, out)
        }
        Command::HullCheck { channel, encoding } => hull_check(&channel, &encoding, out),
        Command::FixedPoints { channel, tol } => fixed_points(&channel, tol, out),
        Command::Optimize { channel, levels, restarts, seed, complex_phases } => {
            optimize(&channel, &levels, restarts, seed, complex_phases, out)
        }
        Command::Sweep { channel, encoding, eta_start, eta_end, steps, nodes, out: path } => {
            sweep(&channel, &encoding, (eta_start, eta_end, steps), nodes, path.as_deref(), out)
        }
        Command::Verify { channel, block, seed, samples } => verify(&channel, block, seed, samples, out),
    }
}

fn dim_of(args: &ChannelArgs) -> usize {
    args.dim.unwrap_or(DEFAULT_DIM)
}

/// The channel named by the flags; `eta` overrides `--eta` (and `--p` for
/// depolarizing) when sweeping.
fn build_channel(args: &ChannelArgs, eta: Option<f64>) -> Result<KrausChannel, Failure> {
    let dim = dim_of(args);
    let need_eta =
        || eta.or(args.eta).ok_or_else(|| usage(format!("--channel {:?} needs --eta", args.channel).to_lowercase()));
    let ch = match args.channel {
        ChannelKind::Pd => subchan::phase_damping(need_eta()?, dim, args.kraus_terms)?,
        ChannelKind::Ad => subchan::amplitude_damping(need_eta()?, dim)?,
        ChannelKind::Dep => {
            let p = eta.or(args.p).or(args.eta).ok_or_else(|| usage("--channel dep needs --p"))?;
            subchan::depolarizing(p, dim)?
        }
        ChannelKind::File => {
            let path = args.channel_file.as_ref().ok_or_else(|| usage("--channel file needs --channel-file"))?;
            let ch = format::load_channel(path)?;
            if let Some(d) = args.dim {
                if d != ch.dim() {
                    return Err(usage(format!("--dim {d} disagrees with `dim {}` in {}", ch.dim(), path.display())));
                }
            }
            ch
        }
    };
    Ok(ch)
}

fn build_encoding(args: &EncodingArgs, dim: usize) -> Result<(Subspace, String), Failure> {
    match (&args.levels, &args.encoding_file) {
        (Some(levels), _) => {
            let label = levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
            Ok((Subspace::from_levels(levels, dim)?, format!("levels {label}")))
        }
        (None, Some(path)) => Ok((format::load_encoding(path, dim)?, format!("file {}", path.display()))),
        (None, None) => Err(usage("give the encoding with --levels or --encoding-file")),
    }
}

fn channel_summary(ch: &KrausChannel, out: Out) -> Outcome {
    writeln!(
        out,
        "channel      {}, dim {}, {} Kraus terms, completeness defect {}",
        ch.family(),
        ch.dim(),
        ch.kraus_truncation(),
        g(ch.tp_defect(), 3)
    )
    .map_err(io)
}

fn fidelity(c: &ChannelArgs, e: &EncodingArgs, quadrature: bool, nodes: usize, out: Out) -> Outcome {
    let ch = build_channel(c, None)?;
    let (k, label) = build_encoding(e, ch.dim())?;
    let closed = average_fidelity_closed(&ch, &k)?;
    let unital = unitality_check(&ch, &k)?;
    channel_summary(&ch, out)?;
    writeln!(out, "encoding     {label}").map_err(io)?;
    writeln!(out, "fidelity     {}", g(closed.value, 12)).map_err(io)?;
    if quadrature {
        let quad = average_fidelity_quadrature(&ch, &k, nodes, nodes)?;
        writeln!(
            out,
            "quadrature   {} ({nodes}x{nodes} nodes, gap {})",
            g(quad.value, 12),
            g((closed.value - quad.value).abs(), 3)
        )
        .map_err(io)?;
    }
    writeln!(
        out,
        "unitality    |P Phi*(P) P - P| = {}, |P Phi(P) P - P| = {}",
        g(unital.defect, 3),
        g(unital.output_defect, 3)
    )
    .map_err(io)
}

fn hull_check(c: &ChannelArgs, e: &EncodingArgs, out: Out) -> Outcome {
    let ch = build_channel(c, None)?;
    let (k, label) = build_encoding(e, ch.dim())?;
    let r = invariant_hull_check(&ch, &k)?;
    channel_summary(&ch, out)?;
    writeln!(out, "subspace     {label} (d = {})", k.d()).map_err(io)?;
    writeln!(out, "verdict      {}", if r.is_invariant_hull { "invariant hull" } else { "not an invariant hull" })
        .map_err(io)?;
    writeln!(
        out,
        "leakage      {} (operator norm), {} (Hilbert-Schmidt) over {} probes",
        g(r.max_leakage, 6),
        g(r.max_leakage_hs, 6),
        r.probed_inputs
    )
    .map_err(io)?;
    writeln!(
        out,
        "trace kept   {} (|P Phi*(P) P - P| = {})",
        if r.unitality_defect <= subchan::tolerance::UNITALITY { "yes" } else { "no" },
        g(r.unitality_defect, 3)
    )
    .map_err(io)?;
    writeln!(
        out,
        "unital       {} (|P Phi(P) P - P| = {})",
        if r.is_unital_subchannel { "yes" } else { "no" },
        g(r.output_unitality_defect, 3)
    )
    .map_err(io)
}

fn describe_operator(x: &FockOperator) -> String {
    let n = x.dim();
    let mut entries: Vec<(usize, usize, Complex64)> =
        (0..n).flat_map(|r| (0..n).map(move |s| (r, s))).map(|(r, s)| (r, s, x.entry(r, s))).collect();
    entries.retain(|e| e.2.norm() > 1e-9);
    // fix the global phase by the largest entry
    let phase = entries
        .iter()
        .max_by(|a, b| a.2.norm().total_cmp(&b.2.norm()))
        .map_or(Complex64::new(1.0, 0.0), |e| e.2.conj() / e.2.norm());
    let shown: Vec<String> = entries
        .iter()
        .take(8)
        .map(|&(r, s, v)| {
            let v = v * phase;
            if v.im.abs() <= 1e-12 {
                format!("{}|{r}><{s}|", g(v.re, 6))
            } else {
                format!("({}{:+}i)|{r}><{s}|", g(v.re, 6), g(v.im, 6))
            }
        })
        .collect();
    let more = if entries.len() > 8 { format!(" + {} more", entries.len() - 8) } else { String::new() };
    format!("{}{more}", shown.join(" + "))
}

fn fixed_points(c: &ChannelArgs, tol: f64, out: Out) -> Outcome {
    let ch = build_channel(c, None)?;
    let basis = fixed_point_space(&ch, tol)?;
    channel_summary(&ch, out)?;
    writeln!(out, "fixed space  dimension {} (singular values <= {})", basis.len(), g(tol, 3)).map_err(io)?;
    for (i, x) in basis.iter().enumerate() {
        writeln!(out, "  {i:>3}  {}", describe_operator(x)).map_err(io)?;
    }
    Ok(())
}

fn optimize(c: &ChannelArgs, levels: &[usize], restarts: usize, seed: u64, complex_phases: bool, out: Out) -> Outcome {
    let ch = build_channel(c, None)?;
    let config = OptimizerConfig { complex_phases, ..OptimizerConfig::default() };
    let r = optimize_encoding_with(&ch, levels, restarts, seed, &config)?;
    channel_summary(&ch, out)?;
    let label = levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
    writeln!(out, "levels       {label}, {} restarts, seed {seed}", r.restarts_run).map_err(io)?;
    writeln!(out, "fidelity     {}", g(r.best_fidelity, 12)).map_err(io)?;
    writeln!(out, "ties         {} restarts within 1e-9 of the best", r.tied_restarts.len()).map_err(io)?;
    let params: Vec<String> = r.best_params.iter().map(|p| g(*p, 9)).collect();
    writeln!(out, "angles       {}", params.join(" ")).map_err(io)?;
    for (j, b) in r.best_encoding.basis().iter().enumerate() {
        let coeffs: Vec<String> = levels
            .iter()
            .map(|&l| {
                let a = b.amplitudes()[l];
                if a.im.abs() <= 1e-12 {
                    format!("{}|{l}>", g(a.re, 9))
                } else {
                    format!("({}{:+}i)|{l}>", g(a.re, 9), g(a.im, 9))
                }
            })
            .collect();
        writeln!(out, "psi{j}         {}", coeffs.join(" + ")).map_err(io)?;
    }
    Ok(())
}

struct SweepRow {
    eta: f64,
    closed: f64,
    quadrature: f64,
}

impl SweepRow {
    fn gap(&self) -> f64 {
        (self.closed - self.quadrature).abs()
    }
}

fn eta_grid(start: f64, end: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
        return Err(usage(format!("need 0 <= eta-start <= eta-end <= 1, got {start} and {end}")));
    }
    match steps {
        0 => Err(usage("--steps must be positive")),
        1 if start == end => Ok(vec![start]),
        1 => Err(usage("--steps 1 needs eta-start = eta-end")),
        _ => Ok((0..steps)
            .map(|i| if i + 1 == steps { end } else { start + (end - start) * i as f64 / (steps - 1) as f64 })
            .collect()),
    }
}

fn sweep(
    c: &ChannelArgs,
    e: &EncodingArgs,
    grid: (f64, f64, usize),
    nodes: usize,
    path: Option<&Path>,
    out: Out,
) -> Outcome {
    if c.channel == ChannelKind::File {
        return Err(usage("sweep needs a parametrized channel (pd, ad or dep)"));
    }
    let etas = eta_grid(grid.0, grid.1, grid.2)?;
    let (k, label) = build_encoding(e, dim_of(c))?;
    let rows = etas
        .par_iter()
        .map(|&eta| {
            let ch = build_channel(c, Some(eta))?;
            Ok(SweepRow {
                eta,
                closed: average_fidelity_closed(&ch, &k)?.value,
                quadrature: average_fidelity_quadrature(&ch, &k, nodes, nodes)?.value,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    match path {
        Some(path) => {
            let fail = |e: csv::Error| Failure::Domain(format!("cannot write {}: {e}", path.display()));
            let mut w = csv::Writer::from_path(path).map_err(fail)?;
            w.write_record(["eta", "fidelity_closed", "fidelity_quadrature", "gap", "encoding"]).map_err(fail)?;
            for r in &rows {
                w.write_record([g(r.eta, 12), g(r.closed, 12), g(r.quadrature, 12), g(r.gap(), 12), label.clone()])
                    .map_err(fail)?;
            }
            w.flush().map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display()).map_err(io)
        }
        None => {
            writeln!(out, "encoding: {label}").map_err(io)?;
            writeln!(out, "{:>14}  {:>16}  {:>16}  {:>10}", "eta", "closed", "quadrature", "gap").map_err(io)?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>14}  {:>16}  {:>16}  {:>10}",
                    g(r.eta, 12),
                    g(r.closed, 12),
                    g(r.quadrature, 12),
                    g(r.gap(), 3)
                )
                .map_err(io)?;
            }
            Ok(())
        }
    }
}

fn verify(c: &ChannelArgs, block: Option<usize>, seed: u64, samples: usize, out: Out) -> Outcome {
    let ch = build_channel(c, None)?;
    let block = block.unwrap_or(ch.dim());
    let r = verify_channel_seeded(&ch, block, seed, samples)?;
    channel_summary(&ch, out)?;
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    writeln!(
        out,
        "block        {} levels, {} sampled states, seed {}{}",
        r.block,
        r.samples,
        r.seed,
        if seed == DEFAULT_VERIFY_SEED { " (default)" } else { "" }
    )
    .map_err(io)?;
    writeln!(out, "trace        {} (defect {})", mark(r.tp_ok), g(r.tp_defect, 3)).map_err(io)?;
    writeln!(out, "hermiticity  {} (defect {})", mark(r.hermiticity_ok), g(r.hermiticity_defect, 3)).map_err(io)?;
    writeln!(out, "positivity   {} (min output eigenvalue {})", mark(r.positivity_ok), g(r.min_output_eigenvalue, 3))
        .map_err(io)?;
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Domain("channel self-checks failed".into()))
    }
}
