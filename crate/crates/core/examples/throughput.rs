use std::time::Instant;

use qfair::adversary::{AdversaryStrategy, RoundChoice};
use qfair::protocol::{run_trial, MillionaireInputs, ProtocolSetup};

fn main() {
    let setup = ProtocolSetup::Qmp { inputs: MillionaireInputs::new(3, 4, 6).unwrap() };
    let s = [AdversaryStrategy::AbortAt { round: RoundChoice::Fixed(5) }, AdversaryStrategy::Honest];
    let n = 100_000;
    let start = Instant::now();
    for seed in 0..n {
        std::hint::black_box(run_trial::<f64>(&setup, &s, seed).unwrap());
    }
    println!("{n} runs in {:?}", start.elapsed());
}
