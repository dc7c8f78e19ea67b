mod common;

use chf_advisor::kb::DEFAULT_KB;
use common::roundtrip::{random_ast, roundtrip, roundtrip_source};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn shipped_kb_files_round_trip() {
    for (name, src) in DEFAULT_KB {
        roundtrip_source(name, src).unwrap();
    }
}

#[test]
fn fixture_facts_round_trip() {
    roundtrip_source("hydralazine_candidate.lp", include_str!("fixtures/hydralazine_candidate.lp")).unwrap();
}

#[test]
fn random_asts_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a75_0001);
    for i in 0..1000 {
        let p = random_ast(&mut rng);
        roundtrip(&p).unwrap_or_else(|e| panic!("ast {i}: {e}"));
    }
}
