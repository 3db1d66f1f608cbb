//! Binary checkpoints of a running ensemble.
//!
//! Layout (little endian): magic, format version, SHA-256 of the
//! parameters and configuration, seed, step index, trajectory count and
//! `dt`, followed by one record per trajectory holding its 24 amplitude
//! components as `f64`, an alive flag and the position of its random stream.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::sim::{trajectory_rng, SimConfig, Simulation};
use super::{PhaseSpacePoint, C};
use crate::error::{Error, Result};
use crate::model::{SystemParams, NUM_MODES};
use crate::scalar::Real;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"QOPOCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointHeader {
    pub params_hash: [u8; 32],
    pub seed: u64,
    pub step: u64,
    pub n_traj: u64,
    pub dt: f64,
}

fn params_hash<T: Real + Serialize>(params: &SystemParams<T>, config: &SimConfig<T>) -> [u8; 32] {
    let json = serde_json::to_vec(&(params, config)).expect("parameters serialize");
    Sha256::digest(&json).into()
}

fn take<const N: usize>(buf: &mut &[u8]) -> Result<[u8; N]> {
    if buf.len() < N {
        return Err(Error::Checkpoint("truncated file".into()));
    }
    let (head, rest) = buf.split_at(N);
    *buf = rest;
    Ok(head.try_into().unwrap())
}

impl CheckpointHeader {
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.params_hash);
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        out.extend_from_slice(&self.n_traj.to_le_bytes());
        out.extend_from_slice(&self.dt.to_le_bytes());
    }

    fn read(buf: &mut &[u8]) -> Result<Self> {
        if &take::<8>(buf)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(take(buf)?);
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        Ok(Self {
            params_hash: take(buf)?,
            seed: u64::from_le_bytes(take(buf)?),
            step: u64::from_le_bytes(take(buf)?),
            n_traj: u64::from_le_bytes(take(buf)?),
            dt: f64::from_le_bytes(take(buf)?),
        })
    }
}

impl<T: Real + Serialize> Simulation<T> {
    pub fn checkpoint_bytes(&self) -> Vec<u8> {
        let header = CheckpointHeader {
            params_hash: params_hash(&self.params, &self.config),
            seed: self.config.seed,
            step: self.step as u64,
            n_traj: self.states.len() as u64,
            dt: self.config.dt.to_f64_lossy(),
        };
        let mut out = Vec::with_capacity(64 + self.states.len() * (24 * 8 + 17));
        header.write(&mut out);
        for ((x, alive), rng) in self.states.iter().zip(&self.alive).zip(&self.rngs) {
            for z in x.alpha.iter().chain(x.alpha_plus.iter()) {
                out.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
                out.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
            }
            out.push(*alive as u8);
            out.extend_from_slice(&rng.get_word_pos().to_le_bytes());
        }
        out
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let tmp = path.as_ref().with_extension("partial");
        fs::File::create(&tmp)?.write_all(&self.checkpoint_bytes())?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Rebuild a simulation from checkpoint bytes. The parameters and
    /// configuration must be the ones the checkpoint was written with.
    pub fn from_checkpoint_bytes(params: SystemParams<T>, config: SimConfig<T>, bytes: &[u8]) -> Result<Self> {
        let mut buf = bytes;
        let header = CheckpointHeader::read(&mut buf)?;
        if header.params_hash != params_hash(&params, &config) {
            return Err(Error::Checkpoint("parameters differ from those in the checkpoint".into()));
        }
        let n = header.n_traj as usize;
        let mut states = Vec::with_capacity(n);
        let mut alive = Vec::with_capacity(n);
        let mut rngs: Vec<ChaCha8Rng> = Vec::with_capacity(n);
        for k in 0..n {
            let mut vals = [C::new(T::zero(), T::zero()); 2 * NUM_MODES];
            for v in vals.iter_mut() {
                let re = f64::from_le_bytes(take(&mut buf)?);
                let im = f64::from_le_bytes(take(&mut buf)?);
                *v = C::new(T::lit(re), T::lit(im));
            }
            let mut x = PhaseSpacePoint::zero();
            x.alpha.copy_from_slice(&vals[..NUM_MODES]);
            x.alpha_plus.copy_from_slice(&vals[NUM_MODES..]);
            states.push(x);
            alive.push(take::<1>(&mut buf)?[0] != 0);
            let mut rng = trajectory_rng(header.seed, k);
            rng.set_word_pos(u128::from_le_bytes(take(&mut buf)?));
            rngs.push(rng);
        }
        if !buf.is_empty() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Simulation::restore(params, config, header.step as usize, states, rngs, alive)
    }

    pub fn load_checkpoint(params: SystemParams<T>, config: SimConfig<T>, path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_checkpoint_bytes(params, config, &bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SystemParams<f64>, SimConfig<f64>) {
        let p = SystemParams::symmetric_at_ratio(0.01, 1.0, 0.8);
        let c = SimConfig::cavity(2.0, 0.01).with_trajectories(32).with_outputs(4).with_seed(3);
        (p, c)
    }

    #[test]
    fn resumed_run_is_bit_identical() {
        let (p, c) = setup();
        let mut whole = Simulation::new(p, c).unwrap();
        whole.run_steps(usize::MAX);

        let mut first = Simulation::new(p, c).unwrap();
        first.run_steps(77);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        first.save_checkpoint(&path).unwrap();
        let mut resumed = Simulation::load_checkpoint(p, c, &path).unwrap();
        assert_eq!(resumed.step_index(), 77);
        resumed.run_steps(usize::MAX);
        assert_eq!(whole.states(), resumed.states());
        assert_eq!(whole.alive(), resumed.alive());
    }

    #[test]
    fn mismatched_parameters_are_rejected() {
        let (p, c) = setup();
        let sim = Simulation::new(p, c).unwrap();
        let bytes = sim.checkpoint_bytes();
        let other = p.with_pump(1.0);
        let err = Simulation::from_checkpoint_bytes(other, c, &bytes).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(_)));
        let err = Simulation::from_checkpoint_bytes(p, c, &bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(_)));
        assert!(Simulation::from_checkpoint_bytes(p, c, b"garbage").is_err());
    }
}
