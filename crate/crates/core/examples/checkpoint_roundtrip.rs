//! Trains a tiny policy, saves it, reloads it bit-exactly and shows how a
//! corrupted payload byte is reported.
//!
//! ```bash
//! cargo run -p mongoose --example checkpoint_roundtrip
//! ```

use mongoose::io::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use mongoose::train::{curriculum_train, TrainConfig};

fn main() -> mongoose::Result<()> {
    let mut config = TrainConfig::new(2, 10);
    config.hidden_size = 8;
    config.batch_size = 4;
    config.steps_per_phase = 20;
    let (ckpt, metrics) = curriculum_train(&config, 1)?;
    println!("trained {} steps, last loss {:.4}", metrics.len(), metrics.last().map_or(0.0, |m| m.loss));

    let dir = std::env::temp_dir().join("mongoose-roundtrip");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("policy.ckpt");
    save_checkpoint(&ckpt, &path)?;
    let back = load_checkpoint(&path)?;
    let same = back.params.values.iter().zip(&ckpt.params.values).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("reloaded {} parameters, bit-identical: {same}", back.params.values.len());

    let mut bytes = ckpt.to_bytes();
    let last = bytes.len() - 3;
    bytes[last] ^= 0x40;
    match Checkpoint::from_bytes(&bytes) {
        Ok(_) => println!("corruption went unnoticed"),
        Err(e) => println!("corrupted copy rejected: {e}"),
    }
    Ok(())
}
