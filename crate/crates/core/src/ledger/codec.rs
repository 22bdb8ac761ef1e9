//! Canonical binary encoding: fixed field order, little-endian integers,
//! `u32` length prefixes, floats as their IEEE-754 bit patterns.

use thiserror::Error;

use crate::contract::{Caller, CompResult};
use crate::types::{ContractConfig, ImageDigest, PairRecord, Pose, RobotId, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("unexpected end of input at byte {0}")]
    Truncated(usize),
    #[error("unknown tag {tag} at byte {at}")]
    BadTag { tag: u8, at: usize },
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn i64(&mut self, v: i64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.u64(v.to_bits())
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u8(v as u8)
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.u32(v.len() as u32);
        self.buf.extend_from_slice(v);
        self
    }

    pub fn str(&mut self, v: &str) -> &mut Self {
        self.bytes(v.as_bytes())
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(DecodeError::Truncated(self.pos))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(DecodeError::Trailing(n)),
        }
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn bool(&mut self) -> Result<bool, DecodeError> {
        let at = self.pos;
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            tag => Err(DecodeError::BadTag { tag, at }),
        }
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], DecodeError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn digest(&mut self) -> Result<ImageDigest, DecodeError> {
        let at = self.pos;
        let raw = self.bytes()?;
        ImageDigest::from_slice(raw).ok_or(DecodeError::Truncated(at))
    }
}

pub fn put_pose(e: &mut Encoder, p: &Pose) {
    e.f64(p.x).f64(p.y).f64(p.theta);
}

pub fn put_pair(e: &mut Encoder, p: &PairRecord) {
    e.u32(p.robot.0).bytes(p.digest.as_bytes());
    put_pose(e, &p.pose);
    e.f64(p.time.0);
}

pub fn get_pair(dec: &mut Decoder<'_>) -> Result<PairRecord, DecodeError> {
    let robot = RobotId(dec.u32()?);
    let digest = dec.digest()?;
    let pose = Pose {
        x: dec.f64()?,
        y: dec.f64()?,
        theta: dec.f64()?,
    };
    let time = Timestamp(dec.f64()?);
    Ok(PairRecord {
        robot,
        digest,
        pose,
        time,
    })
}

pub fn put_config(e: &mut Encoder, c: &ContractConfig) {
    e.u32(c.f)
        .u32(c.n)
        .f64(c.d)
        .f64(c.delta)
        .f64(c.m)
        .u64(c.min_completed_sets);
}

pub fn get_config(dec: &mut Decoder<'_>) -> Result<ContractConfig, DecodeError> {
    Ok(ContractConfig {
        f: dec.u32()?,
        n: dec.u32()?,
        d: dec.f64()?,
        delta: dec.f64()?,
        m: dec.f64()?,
        min_completed_sets: dec.u64()?,
    })
}

pub fn put_result(e: &mut Encoder, r: &CompResult) {
    e.u64(r.set_id)
        .u32(r.robot_a.0)
        .u32(r.robot_b.0)
        .bool(r.anomaly);
}

pub fn get_result(dec: &mut Decoder<'_>) -> Result<CompResult, DecodeError> {
    Ok(CompResult {
        set_id: dec.u64()?,
        robot_a: RobotId(dec.u32()?),
        robot_b: RobotId(dec.u32()?),
        anomaly: dec.bool()?,
    })
}

pub fn put_caller(e: &mut Encoder, c: &Caller) {
    match c {
        Caller::Operator => e.u8(0),
        Caller::Robot(r) => e.u8(1).u32(r.0),
        Caller::Cloud => e.u8(2),
    };
}

pub fn get_caller(dec: &mut Decoder<'_>) -> Result<Caller, DecodeError> {
    let at = dec.pos;
    match dec.u8()? {
        0 => Ok(Caller::Operator),
        1 => Ok(Caller::Robot(RobotId(dec.u32()?))),
        2 => Ok(Caller::Cloud),
        tag => Err(DecodeError::BadTag { tag, at }),
    }
}
