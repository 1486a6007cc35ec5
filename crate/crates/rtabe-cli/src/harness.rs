//! Measurement commands: algorithm latencies, game win rates, and
//! per-mode decryption failure rates.

use std::fs::File;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use rtabe::game::{self, CoinFlipAdversary, GameOutcome, TrialRecord};
use rtabe::policy::{parse_policy, AttributeSet};
use rtabe::ring::{Params, RingElement, SchemeMode};
use rtabe::scheme::{self, KeyRegistry};

use crate::{CliError, CliResult};

fn preset_params(preset: &str, mode: SchemeMode) -> CliResult<Params> {
    match preset {
        "toy" => Ok(Params::toy(mode)),
        "desk" => Ok(Params::desk(mode)),
        other => Err(CliError::Usage(format!("unknown parameter set '{other}'"))),
    }
}

fn random_message<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> RingElement {
    let coeffs: Vec<u64> = (0..params.n())
        .map(|_| rng.gen_range(0..params.p()))
        .collect();
    RingElement::from_coeffs(coeffs, params.q()).expect("coefficients are below p < q")
}

// ------------------------------------------------------------------ bench

fn percentile(sorted: &[Duration], fraction: f64) -> Duration {
    let idx = ((sorted.len() - 1) as f64 * fraction).round() as usize;
    sorted[idx]
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn cmd_bench(params: Params, preset: &str, trials: usize, seed: u64) -> CliResult<()> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let n_attrs = 8u32;
    let tree = parse_policy("thresh(2, att1, att2, and(att3, att4))")
        .expect("bench policy is well-formed");
    let att = AttributeSet::new([1u32, 2, 3, 4]).expect("bench attributes are valid");

    let mut times: [Vec<Duration>; 4] = Default::default();
    for trial in 0..trials {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(trial as u64));

        let t = Instant::now();
        let (pk, msk) = scheme::setup(&params, n_attrs, &mut rng)
            .map_err(|e| CliError::Internal(format!("setup failed: {e}")))?;
        times[0].push(t.elapsed());

        let mut registry = KeyRegistry::new();
        let t = Instant::now();
        let usk = scheme::keygen(&msk, "bench-user", &att, &mut rng, &mut registry)
            .map_err(|e| CliError::Internal(format!("keygen failed: {e}")))?;
        times[1].push(t.elapsed());

        let message = random_message(&params, &mut rng);
        let t = Instant::now();
        let ct = scheme::encrypt(&pk, &message, &tree, &mut rng)
            .map_err(|e| CliError::Internal(format!("encrypt failed: {e}")))?;
        times[2].push(t.elapsed());

        let t = Instant::now();
        let recovered = scheme::decrypt(&ct, &usk, &pk)
            .map_err(|e| CliError::Internal(format!("decrypt failed: {e}")))?;
        times[3].push(t.elapsed());

        if recovered != message {
            return Err(CliError::Internal(
                "bench round trip mismatch in exact mode".into(),
            ));
        }
    }

    println!(
        "bench: {preset} params (n={}, q={}), {trials} trials, seed {seed}",
        params.n(),
        params.q()
    );
    println!("{:<10} {:>12} {:>12}", "algorithm", "median", "p95");
    for (name, series) in ["setup", "keygen", "encrypt", "decrypt"]
        .iter()
        .zip(&mut times)
    {
        series.sort();
        println!(
            "{:<10} {:>9.3} ms {:>9.3} ms",
            name,
            ms(percentile(series, 0.5)),
            ms(percentile(series, 0.95))
        );
    }
    Ok(())
}

// ------------------------------------------------------------------- game

pub fn cmd_game(
    adversary: &str,
    params: Params,
    n_attrs: u32,
    trials: usize,
    records_path: Option<&Path>,
    seed: u64,
) -> CliResult<()> {
    if adversary != "coinflip" {
        return Err(CliError::Usage(format!(
            "unknown adversary '{adversary}' (available: coinflip)"
        )));
    }
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if n_attrs == 0 {
        return Err(CliError::Usage("--attrs must be at least 1".into()));
    }

    let mut records = Vec::with_capacity(trials);
    let mut wins = 0usize;
    let mut decided = 0usize;
    let mut aborted = 0usize;
    for trial in 0..trials {
        let game_seed = seed.wrapping_add(trial as u64);
        let mut rng = ChaCha20Rng::seed_from_u64(game_seed);
        // Separate stream for the adversary's own coin.
        let mut player = CoinFlipAdversary::new(&params, game_seed ^ 0x9e37_79b9_7f4a_7c15);
        let transcript = game::run_game(&mut player, &params, n_attrs, &mut rng)
            .map_err(|e| CliError::Internal(format!("game failed: {e}")))?;
        match transcript.outcome {
            GameOutcome::Win => {
                wins += 1;
                decided += 1;
            }
            GameOutcome::Lose => decided += 1,
            GameOutcome::Abort | GameOutcome::Invalid => aborted += 1,
        }
        records.push(TrialRecord {
            seed: game_seed,
            outcome: transcript.outcome,
            queries: transcript.queries.len(),
        });
    }

    let rate = wins as f64 / decided.max(1) as f64;
    let se = (rate * (1.0 - rate) / decided.max(1) as f64).sqrt();
    println!("game: adversary {adversary}, {trials} trials, seed {seed}");
    println!(
        "wins: {wins}/{decided}, rate {rate:.4}, 3-sigma interval [{:.4}, {:.4}]",
        rate - 3.0 * se,
        rate + 3.0 * se
    );
    if aborted > 0 {
        println!("aborted/invalid games: {aborted}");
    }
    if let Some(path) = records_path {
        let file = File::create(path)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        game::write_records(file, &records)
            .map_err(|e| CliError::Internal(format!("cannot write records: {e}")))?;
        println!("wrote {} records to {}", records.len(), path.display());
    }
    Ok(())
}

// ----------------------------------------------------------- noise report

pub fn cmd_noise_report(preset: &str, trials: usize, seed: u64) -> CliResult<()> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    println!("noise report: {preset} params, {trials} trials per mode, seed {seed}");
    println!(
        "{:<28} {:>8} {:>9} {:>9}",
        "mode", "trials", "failures", "rate"
    );
    for mode in SchemeMode::all() {
        let params = preset_params(preset, mode)?;
        let failures = measure_failures(&params, trials, seed)?;
        println!(
            "{:<28} {:>8} {:>9} {:>9.4}",
            params.mode.to_string(),
            trials,
            failures,
            failures as f64 / trials as f64
        );
    }
    Ok(())
}

/// One decryption round trip per trial on a fixed threshold policy;
/// a failure is any outcome other than exact message recovery.
fn measure_failures(params: &Params, trials: usize, seed: u64) -> CliResult<usize> {
    let tree = parse_policy("thresh(2, att1, att2, att3)").expect("report policy is well-formed");
    let att = AttributeSet::new([1u32, 2]).expect("report attributes are valid");
    let mode_tag = (params.mode.to_byte() as u64) << 56;
    let mut failures = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ mode_tag ^ (trial as u64));
        let (pk, msk) = scheme::setup(params, 4, &mut rng)
            .map_err(|e| CliError::Internal(format!("setup failed: {e}")))?;
        let mut registry = KeyRegistry::new();
        let usk = scheme::keygen(&msk, "probe", &att, &mut rng, &mut registry)
            .map_err(|e| CliError::Internal(format!("keygen failed: {e}")))?;
        let message = random_message(params, &mut rng);
        let ct = scheme::encrypt(&pk, &message, &tree, &mut rng)
            .map_err(|e| CliError::Internal(format!("encrypt failed: {e}")))?;
        match scheme::decrypt(&ct, &usk, &pk) {
            Ok(recovered) if recovered == message => {}
            Ok(_) | Err(_) => failures += 1,
        }
    }
    Ok(failures)
}
