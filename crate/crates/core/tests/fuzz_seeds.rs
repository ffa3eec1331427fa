//! Runs the fuzz target bodies on the checked-in corpus and on mutated copies of it, so
//! the parsers stay panic-free without a nightly toolchain.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sweeping::movingset::Scenario;
use sweeping::oracles::OracleScenario;
use sweeping::{Point, SetDescriptor};

fn corpus(target: &str) -> Vec<Vec<u8>> {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "../../fuzz/corpus", target]
        .iter()
        .collect();
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {target}");
    files
        .iter()
        .map(|p: &PathBuf| std::fs::read(Path::new(p)).unwrap())
        .collect()
}

fn set_descriptor_json(data: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(data) else {
        return false;
    };
    let Ok(set) = serde_json::from_str::<SetDescriptor>(text) else {
        return false;
    };
    let back: SetDescriptor = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
    assert_eq!(back, set);
    let _ = set.project(&Point::zeros(set.dim()));
    true
}

fn scenario_json(data: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(data) else {
        return false;
    };
    let Ok(scenario) = Scenario::from_json(text) else {
        return false;
    };
    let again = Scenario::from_json(&scenario.to_json()).unwrap();
    assert_eq!(again.to_json(), scenario.to_json());
    let _ = scenario.moving_set.check_admissibility();
    true
}

fn fixture_json(data: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(data) else {
        return false;
    };
    let Ok(os) = OracleScenario::from_json(text) else {
        return false;
    };
    let _ = os.closed_form(0.0);
    let _ = os.closed_form(os.moving_set.horizon());
    true
}

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    let mut out = seed.to_vec();
    for _ in 0..rng.gen_range(1..4) {
        if out.is_empty() {
            out.push(rng.gen());
            continue;
        }
        let i = rng.gen_range(0..out.len());
        match rng.gen_range(0..4) {
            0 => out[i] = rng.gen(),
            1 => {
                out.remove(i);
            }
            2 => out.insert(i, b"-0.5e9,[]{}\":"[rng.gen_range(0..13)]),
            _ => out.truncate(i),
        }
    }
    out
}

fn exercise(target: &str, body: fn(&[u8]) -> bool) {
    let seeds = corpus(target);
    for s in &seeds {
        assert!(body(s), "{target} seed does not parse: {}", String::from_utf8_lossy(s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..2000 {
        body(&mutate(&mut rng, &seeds[k % seeds.len()]));
    }
}

#[test]
fn set_descriptor_corpus() {
    exercise("set_descriptor_json", set_descriptor_json);
}

#[test]
fn scenario_corpus() {
    exercise("scenario_json", scenario_json);
}

#[test]
fn fixture_corpus() {
    exercise("fixture_json", fixture_json);
}
