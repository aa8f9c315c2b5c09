//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use urdu_g2p::cisampa::{PhonemeClass, PhonemeId, PhonemeString};
use urdu_g2p::eval::{edit_distance, evaluate};
use urdu_g2p::lexicon::{Lexicon, LexiconEntry, SplitSpec};
use urdu_g2p::script::tokenize;
use urdu_g2p::seq2seq::{
    self, decoder_step, encode, sequence_loss, training_loss, ModelConfig, ModelParams,
    TrainingConfig, OUT_START,
};
use urdu_g2p::DEFAULT_SEED;

use common::{inv, spaced_lexicon, synthetic};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_urdu-g2p")
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(bin())
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

// 1 ------------------------------------------------------------------------

fn inventory_invariants() -> Outcome {
    let inv = inv();
    check(inv.len() == 67, || format!("{} phonemes", inv.len()))?;
    let expected = [
        (PhonemeClass::Consonant, 28),
        (PhonemeClass::ConsonantAspirated, 16),
        (PhonemeClass::LongVowel, 7),
        (PhonemeClass::NasalizedLongVowel, 7),
        (PhonemeClass::HalfLongVowel, 3),
        (PhonemeClass::ShortVowel, 3),
        (PhonemeClass::NasalizedShortVowel, 3),
    ];
    for (class, n) in expected {
        check(inv.count(class) == n, || format!("{class}: {} != {n}", inv.count(class)))?;
    }
    let consonants = inv.phonemes().iter().filter(|p| p.class.is_consonant()).count();
    check(consonants == 44, || format!("{consonants} consonants"))?;
    run_cli(&["validate-inventory"])?;
    Ok("67 = 28+16 / 7 / 7 / 3 / 3 / 3; validate-inventory exit 0".into())
}

// 2 ------------------------------------------------------------------------

/// Number of parses of `s` over `names`, and the last-found parse.
fn dp_parses(s: &str, names: &[&str]) -> (usize, Vec<usize>) {
    let n = s.len();
    let mut ways = vec![0usize; n + 1];
    let mut pick = vec![usize::MAX; n + 1];
    ways[n] = 1;
    for i in (0..n).rev() {
        for (k, w) in names.iter().enumerate() {
            if s[i..].starts_with(w) && ways[i + w.len()] > 0 {
                ways[i] += ways[i + w.len()];
                pick[i] = k;
            }
        }
    }
    let mut parse = Vec::new();
    if ways[0] > 0 {
        let mut i = 0;
        while i < n {
            parse.push(pick[i]);
            i += names[pick[i]].len();
        }
    }
    (ways[0], parse)
}

fn codec() -> Outcome {
    let inv = inv();
    check(inv.check_unique_decodability().is_uniquely_decodable(), || "inventory is not uniquely decodable".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for _ in 0..1000 {
        let len = rng.gen_range(1..=30);
        let p = PhonemeString(
            (0..len)
                .map(|_| PhonemeId(rng.gen_range(0..inv.len() as u16)))
                .collect(),
        );
        let s = inv.concatenate(&p);
        check(inv.segment_concatenated(&s).as_ref() == Ok(&p), || format!("round trip failed on {s}"))?;
    }

    let all_names: Vec<&str> = inv.phonemes().iter().map(|p| p.name.as_str()).collect();
    let sub = ["A", "N", "A_A", "T_D", "D_Z", "S_H", "A_A_N", "T_D_H", "D_Z_H", "T_S_H"];
    // every token sequence over the sub-inventory with concatenated length <= 12
    let mut stack: Vec<(String, Vec<&str>)> = vec![(String::new(), Vec::new())];
    let mut n_sequences = 0usize;
    while let Some((s, toks)) = stack.pop() {
        if !toks.is_empty() {
            n_sequences += 1;
            let (ways, parse) = dp_parses(&s, &all_names);
            check(ways == 1, || format!("{s}: {ways} parses"))?;
            let got = inv.segment_concatenated(&s).map_err(|e| format!("{s}: {e}"))?;
            let oracle: Vec<&str> = parse.iter().map(|&k| all_names[k]).collect();
            let names: Vec<&str> = got.iter().map(|&id| inv.name(id)).collect();
            check(names == oracle && names == toks, || format!("{s}: {names:?} vs {oracle:?}"))?;
        }
        for t in sub {
            if s.len() + t.len() <= 12 {
                let mut next = toks.clone();
                next.push(t);
                stack.push((format!("{s}{t}"), next));
            }
        }
    }
    // every string over the sub-inventory's characters up to length 7,
    // parseable or not
    let chars = ['A', 'N', '_', 'T', 'D', 'H'];
    let mut n_strings = 0usize;
    let mut frontier = vec![String::new()];
    for _ in 0..7 {
        let mut next = Vec::with_capacity(frontier.len() * chars.len());
        for s in &frontier {
            for c in chars {
                let t = format!("{s}{c}");
                n_strings += 1;
                let (ways, _) = dp_parses(&t, &all_names);
                let ok = inv.segment_concatenated(&t).is_ok();
                check(ok == (ways == 1), || format!("{t}: segment ok={ok}, {ways} parses"))?;
                check(ways <= 1, || format!("{t}: {ways} parses"))?;
                next.push(t);
            }
        }
        frontier = next;
    }

    for (s, want) in [
        ("ALA_AMA_AT_D", "A L A_A M A_A T_D"),
        ("D_ZA_AI_ID_DA_AD_D", "D_Z A_A I_I D_D A_A D_D"),
    ] {
        let got = inv.segment_concatenated(s).map_err(|e| e.to_string())?;
        check(inv.spaced(&got) == want, || format!("{s} -> {}", inv.spaced(&got)))?;
    }
    Ok(format!(
        "UniquelyDecodable; 1000 round trips; {n_sequences} sequences and {n_strings} raw strings agree with DP oracle; both anchors exact"
    ))
}

// 3 ------------------------------------------------------------------------

fn gradient_check() -> Outcome {
    const H: f64 = 1e-5;
    const TOL: f64 = 1e-4;
    // gradients below this magnitude are compared absolutely
    const FLOOR: f64 = 1e-6;
    let mut worst = 0.0f64;
    let mut n_checked = 0usize;
    for seed in [1u64, 2, 3] {
        let cfg = ModelConfig {
            num_layers: 2,
            hidden_size: 4,
            embed_size: 4,
            max_decode_len: 10,
            seed,
        };
        let (v_in, v_out) = (8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let mut params = ModelParams::init(&cfg, v_in, v_out);
        let word: Vec<usize> = (0..rng.gen_range(2..=4)).map(|_| rng.gen_range(3..v_in)).collect();
        let target: Vec<usize> = (0..rng.gen_range(2..=4)).map(|_| rng.gen_range(4..v_out)).collect();
        let (_, grads) = training_loss(&params, &word, &target).map_err(|e| e.to_string())?;
        let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.to_vec()).collect();
        let n_tensors = analytic.len();
        for ti in 0..n_tensors {
            for k in 0..analytic[ti].len() {
                let orig = params.tensors()[ti][k];
                params.tensors_mut()[ti][k] = orig + H;
                let plus = sequence_loss(&params, &word, &target).unwrap();
                params.tensors_mut()[ti][k] = orig - H;
                let minus = sequence_loss(&params, &word, &target).unwrap();
                params.tensors_mut()[ti][k] = orig;
                let fd = (plus - minus) / (2.0 * H);
                let a = analytic[ti][k];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(FLOOR);
                worst = worst.max(rel);
                n_checked += 1;
                check(rel < TOL, || {
                    format!("seed {seed} tensor {ti} index {k}: analytic {a:e} fd {fd:e} rel {rel:e}")
                })?;
            }
        }
    }
    Ok(format!("{n_checked} gradients over 3 seeds, max rel err {worst:.2e}"))
}

// 4 ------------------------------------------------------------------------

fn analytic_loss() -> Outcome {
    let mut worst = 0.0f64;
    for v_out in [5usize, 8, 71] {
        let cfg = ModelConfig {
            num_layers: 2,
            hidden_size: 6,
            embed_size: 5,
            max_decode_len: 10,
            seed: 0,
        };
        let params = ModelParams::zeros(&cfg, 9, v_out);
        let word = [3usize, 5, 4];
        let target = [4usize, 4, v_out - 1];
        let expected = (v_out as f64).ln();
        let loss = sequence_loss(&params, &word, &target).map_err(|e| e.to_string())?;
        worst = worst.max((loss - expected).abs());
        let mut state = encode(&params, &word).map_err(|e| e.to_string())?;
        let mut token = OUT_START;
        for &y in &target {
            let (next, log_probs) = decoder_step(&params, &state, token);
            worst = worst.max((-log_probs[y] - expected).abs());
            state = next;
            token = y;
        }
    }
    check(worst <= 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("loss = ln|V_out| for |V_out| in {{5, 8, 71}}, max deviation {worst:.1e}"))
}

// 5 ------------------------------------------------------------------------

fn memorization() -> Outcome {
    let pairs = synthetic::generate(50, 0.11, DEFAULT_SEED);
    let lex = spaced_lexicon(&synthetic::lexicon_text(&pairs));
    check(lex.num_words() == 50, || "fixture is not 50 unique words".into())?;
    let cfg = ModelConfig {
        num_layers: 2,
        hidden_size: 64,
        embed_size: 64,
        max_decode_len: 30,
        seed: DEFAULT_SEED,
    };
    let tcfg = TrainingConfig {
        learning_rate: 5e-3,
        batch_size: 8,
        max_epochs: 300,
        patience: 300,
        ..TrainingConfig::default()
    };
    let (model, log) = seq2seq::train(&lex, &lex, &cfg, &tcfg, inv()).map_err(|e| e.to_string())?;
    let wer = model.word_error_rate(&lex);
    check(wer == 0.0, || {
        format!("training accuracy {:.2}% after {} epochs", 100.0 * (1.0 - wer), log.epochs.len())
    })?;
    Ok(format!("100% training accuracy at epoch {}", log.best_epoch))
}

// 6 ------------------------------------------------------------------------

fn synthetic_proxy() -> Outcome {
    let pairs = synthetic::generate(2000, 0.11, DEFAULT_SEED);
    let lex = spaced_lexicon(&synthetic::lexicon_text(&pairs));
    let coverage = lex.diacritic_coverage();
    check((coverage - 0.11).abs() < 1e-12, || format!("coverage {coverage}"))?;
    let (train, valid, test) = lex.split(&SplitSpec::default()).map_err(|e| e.to_string())?;
    let cfg = ModelConfig {
        num_layers: 2,
        hidden_size: 128,
        embed_size: 128,
        max_decode_len: 30,
        seed: DEFAULT_SEED,
    };
    let tcfg = TrainingConfig {
        learning_rate: 2e-3,
        batch_size: 16,
        max_epochs: 60,
        patience: 8,
        ..TrainingConfig::default()
    };
    let (model, log) =
        seq2seq::train_with_progress(&train, &valid, &cfg, &tcfg, inv(), |e| {
            eprintln!(
                "    epoch {:3}  train loss {:.5}  valid WER {:.4}",
                e.epoch, e.train_loss, e.valid_wer
            )
        })
        .map_err(|e| e.to_string())?;
    let report = evaluate(&test, |w| model.greedy_decode(w).ok().map(|p| p.pron));
    check(report.accuracy >= 0.90, || {
        format!("held-out accuracy {:.2}% (PER {:.2}%)", 100.0 * report.accuracy, 100.0 * report.per)
    })?;
    Ok(format!(
        "{}/{}/{} split; best epoch {}; held-out accuracy {:.2}%, PER {:.2}%",
        train.num_words(),
        valid.num_words(),
        test.num_words(),
        log.best_epoch,
        100.0 * report.accuracy,
        100.0 * report.per
    ))
}

// 7 ------------------------------------------------------------------------

/// Minimum number of edits by breadth-first search over alignment states.
fn brute_force_distance(a: &[u8], b: &[u8], seen: &mut Vec<bool>) -> usize {
    let w = b.len() + 1;
    seen.clear();
    seen.resize((a.len() + 1) * w, false);
    let mut frontier = vec![(0usize, 0usize)];
    for cost in 0.. {
        let mut next = Vec::new();
        while let Some((i, j)) = frontier.pop() {
            if std::mem::replace(&mut seen[i * w + j], true) {
                continue;
            }
            if (i, j) == (a.len(), b.len()) {
                return cost;
            }
            if i < a.len() && j < b.len() {
                if a[i] == b[j] {
                    frontier.push((i + 1, j + 1));
                } else {
                    next.push((i + 1, j + 1));
                }
            }
            if i < a.len() {
                next.push((i + 1, j));
            }
            if j < b.len() {
                next.push((i, j + 1));
            }
        }
        frontier = next;
    }
    unreachable!()
}

fn evaluation_oracle() -> Outcome {
    let mut strings: Vec<Vec<u8>> = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..6 {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<u8>| {
                (0..3u8).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        strings.extend(layer.iter().cloned());
    }
    let mut seen = Vec::new();
    for a in &strings {
        for b in &strings {
            let (d, ops) = edit_distance(a, b);
            let oracle = brute_force_distance(a, b, &mut seen);
            check(d == oracle, || format!("{a:?} {b:?}: {d} vs {oracle}"))?;
            check(ops.iter().filter(|o| o.is_error()).count() == d, || format!("{a:?} {b:?}: script cost"))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let random = |rng: &mut ChaCha8Rng| -> Vec<u8> {
        (0..rng.gen_range(0..=12)).map(|_| rng.gen_range(0..4u8)).collect()
    };
    for _ in 0..10_000 {
        let (x, y, z) = (random(&mut rng), random(&mut rng), random(&mut rng));
        let d = |p: &[u8], q: &[u8]| edit_distance(p, q).0;
        check(d(&x, &x) == 0, || "identity".into())?;
        check((d(&x, &y) == 0) == (x == y), || "separation".into())?;
        check(d(&x, &y) == d(&y, &x), || format!("symmetry {x:?} {y:?}"))?;
        check(d(&x, &z) <= d(&x, &y) + d(&y, &z), || format!("triangle {x:?} {y:?} {z:?}"))?;
    }

    // 100 words, 36 of them mispredicted
    let pairs = synthetic::generate(100, 0.0, 4);
    let test = spaced_lexicon(&synthetic::lexicon_text(&pairs));
    let wrong: std::collections::HashSet<String> =
        pairs.iter().step_by(2).take(36).map(|(w, _)| w.clone()).collect();
    let report = evaluate(&test, |w| {
        let mut p = test.prons(&w.to_string()).next().unwrap().clone();
        if wrong.contains(&w.to_string()) {
            p.0.push(inv().id("A").unwrap());
        }
        Some(p)
    });
    check(report.n_words == 100 && report.n_word_errors == 36, || format!("{report:?}"))?;
    check(report.wer == 0.36 && report.accuracy == 0.64, || {
        format!("wer {} accuracy {}", report.wer, report.accuracy)
    })?;
    Ok(format!(
        "{} pairs match brute force; 10000 axiom triples; wer {} / accuracy {}",
        strings.len() * strings.len(),
        report.wer,
        report.accuracy
    ))
}

// 8 ------------------------------------------------------------------------

struct PipelineOutput {
    files: Vec<(String, Vec<u8>)>,
}

fn pipeline(dir: &Path, lexicon_text: &str) -> Result<PipelineOutput, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    std::fs::write(p("lex.tsv"), lexicon_text).map_err(|e| e.to_string())?;
    run_cli(&["split", &p("lex.tsv")])?;
    run_cli(&[
        "train",
        "--train",
        &p("lex.train"),
        "--valid",
        &p("lex.valid"),
        "--model",
        &p("model.bin"),
        "--log",
        &p("train.tsv"),
        "--layers",
        "2",
        "--hidden",
        "16",
        "--max-epochs",
        "3",
        "--lr",
        "0.01",
        "--quiet",
    ])?;
    let text = run_cli(&[
        "evaluate",
        "--model",
        &p("model.bin"),
        "--test",
        &p("lex.test"),
        "--report-tsv",
        &p("report.tsv"),
        "--confusion",
        &p("confusion.tsv"),
    ])?;
    std::fs::write(p("report.txt"), text).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for name in [
        "lex.train",
        "lex.valid",
        "lex.test",
        "model.bin",
        "train.tsv",
        "report.tsv",
        "confusion.tsv",
        "report.txt",
    ] {
        files.push((name.to_string(), std::fs::read(p(name)).map_err(|e| e.to_string())?));
    }
    Ok(PipelineOutput { files })
}

fn determinism() -> Outcome {
    let pairs = synthetic::generate(300, 0.11, DEFAULT_SEED);
    let text = synthetic::lexicon_text(&pairs);
    let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = pipeline(d1.path(), &text)?;
    let b = pipeline(d2.path(), &text)?;
    for ((name, x), (_, y)) in a.files.iter().zip(&b.files) {
        check(x == y, || format!("{name} differs between runs"))?;
    }

    let model_path = d1.path().join("model.bin");
    let model = seq2seq::load_model(&model_path, inv()).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&model_path).map_err(|e| e.to_string())?;
    check(seq2seq::to_bytes(&model) == bytes, || "save -> load -> save changed bytes".into())?;

    let words: Vec<_> = pairs.iter().take(100).map(|(w, _)| tokenize(w)).collect();
    let mut same = 0;
    for w in &words {
        let g = model.greedy_decode(w);
        let b = model.beam_decode(w, 1, 1, true);
        match (g, b) {
            (Ok(g), Ok(b)) => check(g.pron == b[0].pron && g.log_prob == b[0].log_prob, || {
                format!("{w}: beam 1 differs from greedy")
            })?,
            (Err(g), Err(b)) => check(g == b, || format!("{w}: errors differ"))?,
            _ => return Err(format!("{w}: one decoder failed")),
        }
        same += 1;
    }
    Ok(format!(
        "{} pipeline artifacts byte-identical; save/load/save identical; beam 1 == greedy on {same} words",
        a.files.len()
    ))
}

// 9 ------------------------------------------------------------------------

fn split_sizes() -> Outcome {
    let letters: Vec<char> = "ابپتٹثجچحخدڈذرڑزژسشصضطظعغفقکگلمنوہءیے".chars().collect();
    let pron = inv().parse_spaced("A").unwrap();
    let mut lex = Lexicon::new();
    for i in 0..46_000usize {
        let mut k = i;
        let mut word = String::from("ب");
        loop {
            word.push(letters[k % letters.len()]);
            k /= letters.len();
            if k == 0 {
                break;
            }
        }
        lex.push(LexiconEntry {
            word: tokenize(&word),
            pron: pron.clone(),
            line_no: i + 1,
        })
        .map_err(|e| e.to_string())?;
    }
    check(lex.num_words() == 46_000, || format!("{} words", lex.num_words()))?;
    let (train, valid, test) = lex.split(&SplitSpec::default()).map_err(|e| e.to_string())?;
    let sizes = (train.num_words(), valid.num_words(), test.num_words());
    check(sizes == (39_100, 2_300, 4_600), || format!("{sizes:?}"))?;
    Ok(format!("{} / {} / {}", sizes.0, sizes.1, sizes.2))
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [(usize, &str, fn() -> Outcome, Duration); 9] = [
        (1, "inventory invariants", inventory_invariants, Duration::from_secs(1)),
        (2, "codec", codec, Duration::from_secs(30)),
        (3, "gradient exactness", gradient_check, Duration::from_secs(120)),
        (4, "analytic loss", analytic_loss, Duration::from_secs(60)),
        (5, "memorization", memorization, Duration::from_secs(300)),
        (6, "synthetic-language proxy", synthetic_proxy, Duration::from_secs(1800)),
        (7, "evaluation oracle", evaluation_oracle, Duration::from_secs(300)),
        (8, "determinism and persistence", determinism, Duration::from_secs(600)),
        (9, "split sizes", split_sizes, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (n, name, f, limit) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS  {detail} [{took:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL  {why} [{took:.1?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
