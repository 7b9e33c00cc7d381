//! Rateless decoder statistics: fragments needed to decode.

use lora_fuota::fec::RatelessModel;

fn main() {
    for model in [RatelessModel::ideal(200), RatelessModel::raptor(200)] {
        println!("{:?}: expected fragments {:.4}", model.mode, model.expected_fragments());
        for m in 200..204 {
            println!("  P(decode at fragment {m}) = {:.6}", model.completion_pmf(m));
        }
    }
}
