//! Binary play records (`.qmplay`).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! u8  version (= 1)
//! u32 len | meta   : str level_id, str user_id, i64 timestamp_ms, str client_version
//! u32 len | path   : u8 origin, u32 n, n × (f64 t, f64 x0, f64 depth)
//! u32 len | score  : f64 fidelity, f64 time_used, f64 time_penalty, i64 bonus,
//!                    i64 total, u8 stars, u8 death kind (0 none, 1 zone, 2 edge),
//!                    [f64 time, u32 zone (kind 1) | f64 time (kind 2)],
//!                    u32 m, m × f64 feedback
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8. A batch file is a sequence of
//! records, each preceded by its u32 byte length.

use serde::{Deserialize, Serialize};

use super::{ControlPath, PathOrigin, RecordError};
use crate::level::{Death, DeathCause, ScoreReport};
use crate::quantum::ControlSample;

pub const RECORD_VERSION: u8 = 1;

/// One stored game: the full path plus how it scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayRecord {
    pub level_id: String,
    pub user_id: String,
    pub timestamp_ms: i64,
    pub client_version: String,
    pub path: ControlPath,
    pub score: ScoreReport,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("section longer than 4 GiB"));
    }
    fn section(&mut self, body: Writer) {
        self.len(body.0.len());
        self.0.extend_from_slice(&body.0);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], RecordError> {
        if self.buf.len() < n {
            return Err(RecordError::Malformed(format!("truncated {}", self.what)));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, RecordError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, RecordError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64, RecordError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, RecordError> {
        Ok(f64::from_bits(u64::from_le_bytes(
            self.take(8)?.try_into().unwrap(),
        )))
    }
    fn str(&mut self) -> Result<String, RecordError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| RecordError::Malformed(format!("invalid UTF-8 in {}", self.what)))
    }
    fn count(&mut self, item_size: usize) -> Result<usize, RecordError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(item_size) > self.buf.len() {
            return Err(RecordError::Malformed(format!("truncated {}", self.what)));
        }
        Ok(n)
    }
    fn section(&mut self, what: &'static str) -> Result<Reader<'a>, RecordError> {
        self.what = what;
        let n = self.u32()? as usize;
        Ok(Reader {
            buf: self.take(n)?,
            what,
        })
    }
    fn finish(self) -> Result<(), RecordError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(RecordError::Malformed(format!(
                "{} trailing bytes after {}",
                self.buf.len(),
                self.what
            )))
        }
    }
}

pub fn encode_play(record: &PlayRecord) -> Vec<u8> {
    let mut out = Writer(Vec::new());
    out.u8(RECORD_VERSION);

    let mut meta = Writer(Vec::new());
    meta.str(&record.level_id);
    meta.str(&record.user_id);
    meta.i64(record.timestamp_ms);
    meta.str(&record.client_version);
    out.section(meta);

    let mut path = Writer(Vec::new());
    path.u8(record.path.origin.code());
    path.len(record.path.len());
    for s in record.path.samples() {
        path.f64(s.t);
        path.f64(s.x0);
        path.f64(s.depth);
    }
    out.section(path);

    let sc = &record.score;
    let mut score = Writer(Vec::new());
    score.f64(sc.fidelity);
    score.f64(sc.time_used);
    score.f64(sc.time_penalty);
    score.i64(sc.bonus_points);
    score.i64(sc.total_score);
    score.u8(sc.stars);
    match sc.death {
        None => score.u8(0),
        Some(Death {
            time,
            cause: DeathCause::Zone(zone),
        }) => {
            score.u8(1);
            score.f64(time);
            score.u32(zone);
        }
        Some(Death {
            time,
            cause: DeathCause::Edge,
        }) => {
            score.u8(2);
            score.f64(time);
        }
    }
    score.len(sc.feedback_trace.len());
    for &v in &sc.feedback_trace {
        score.f64(v);
    }
    out.section(score);
    out.0
}

pub fn decode_play(bytes: &[u8]) -> Result<PlayRecord, RecordError> {
    let mut r = Reader {
        buf: bytes,
        what: "header",
    };
    let version = r.u8()?;
    if version != RECORD_VERSION {
        return Err(RecordError::UnsupportedVersion(version));
    }

    let mut meta = r.section("meta section")?;
    let level_id = meta.str()?;
    let user_id = meta.str()?;
    let timestamp_ms = meta.i64()?;
    let client_version = meta.str()?;
    meta.finish()?;

    let mut p = r.section("path section")?;
    let code = p.u8()?;
    let origin = PathOrigin::from_code(code)
        .ok_or_else(|| RecordError::Malformed(format!("unknown path origin {code}")))?;
    let n = p.count(24)?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let (t, x0, depth) = (p.f64()?, p.f64()?, p.f64()?);
        samples.push(ControlSample::new(t, x0, depth));
    }
    p.finish()?;
    let path = ControlPath::new(samples, origin)?;

    let mut s = r.section("score section")?;
    let fidelity = s.f64()?;
    let time_used = s.f64()?;
    let time_penalty = s.f64()?;
    let bonus_points = s.i64()?;
    let total_score = s.i64()?;
    let stars = s.u8()?;
    let death = match s.u8()? {
        0 => None,
        1 => Some(Death {
            time: s.f64()?,
            cause: DeathCause::Zone(s.u32()?),
        }),
        2 => Some(Death {
            time: s.f64()?,
            cause: DeathCause::Edge,
        }),
        k => return Err(RecordError::Malformed(format!("unknown death kind {k}"))),
    };
    let m = s.count(8)?;
    let feedback_trace = (0..m).map(|_| s.f64()).collect::<Result<Vec<_>, _>>()?;
    s.finish()?;
    r.what = "record";
    r.finish()?;

    Ok(PlayRecord {
        level_id,
        user_id,
        timestamp_ms,
        client_version,
        path,
        score: ScoreReport {
            fidelity,
            time_used,
            time_penalty,
            bonus_points,
            total_score,
            stars,
            death,
            feedback_trace,
        },
    })
}

pub fn encode_batch(records: &[PlayRecord]) -> Vec<u8> {
    let mut out = Writer(Vec::new());
    for record in records {
        out.section(Writer(encode_play(record)));
    }
    out.0
}

pub fn decode_batch(bytes: &[u8]) -> Result<Vec<PlayRecord>, RecordError> {
    let mut r = Reader {
        buf: bytes,
        what: "batch",
    };
    let mut records = Vec::new();
    while !r.buf.is_empty() {
        let item = r.section("batch entry")?;
        records.push(decode_play(item.buf)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_record() -> PlayRecord {
        PlayRecord {
            level_id: "tutorial_1".into(),
            user_id: "u-42".into(),
            timestamp_ms: 1_500_000_000_000,
            client_version: "0.1.0".into(),
            path: ControlPath::new(
                vec![
                    ControlSample::new(0.0, -0.5, 160.0),
                    ControlSample::new(0.1, 0.0, 120.0),
                    ControlSample::new(0.2, 0.5, 160.0),
                ],
                PathOrigin::Human,
            )
            .unwrap(),
            score: ScoreReport {
                fidelity: 0.93,
                time_used: 0.2,
                time_penalty: 0.05,
                bonus_points: 25,
                total_score: 909,
                stars: 2,
                death: None,
                feedback_trace: vec![0.0, 0.4, 0.93],
            },
        }
    }

    #[test]
    fn round_trip() {
        let r = sample_record();
        let bytes = encode_play(&r);
        assert_eq!(bytes[0], RECORD_VERSION);
        assert_eq!(decode_play(&bytes).unwrap(), r);
    }

    #[test]
    fn header_layout_is_fixed() {
        let bytes = encode_play(&sample_record());
        // meta length = 4+10 + 4+4 + 8 + 4+5
        assert_eq!(&bytes[1..5], &39u32.to_le_bytes());
        assert_eq!(&bytes[5..9], &10u32.to_le_bytes());
        assert_eq!(&bytes[9..19], b"tutorial_1");
        // path: origin + count + 3 samples
        assert_eq!(&bytes[44..48], &(1u32 + 4 + 72).to_le_bytes());
        assert_eq!(bytes[48], PathOrigin::Human.code());
    }

    #[test]
    fn every_truncation_fails() {
        let bytes = encode_play(&sample_record());
        for cut in 0..bytes.len() {
            assert!(decode_play(&bytes[..cut]).is_err(), "prefix {cut} decoded");
        }
    }

    #[test]
    fn trailing_bytes_and_bad_version_rejected() {
        let mut bytes = encode_play(&sample_record());
        bytes.push(0);
        assert!(matches!(
            decode_play(&bytes),
            Err(RecordError::Malformed(_))
        ));
        bytes.pop();
        bytes[0] = 7;
        assert_eq!(decode_play(&bytes), Err(RecordError::UnsupportedVersion(7)));
    }

    #[test]
    fn invalid_path_rejected() {
        let mut r = sample_record();
        r.path = ControlPath::stationary(0.0, 10.0, 0.1, PathOrigin::Human).unwrap();
        let mut bytes = encode_play(&r);
        // second sample's time is the last 24 bytes of the path section
        let path_start = 1 + 4 + 39 + 4;
        let t1 = path_start + 1 + 4 + 24;
        bytes[t1..t1 + 8].copy_from_slice(&0.0f64.to_bits().to_le_bytes());
        assert!(matches!(decode_play(&bytes), Err(RecordError::Path(_))));
    }

    #[test]
    fn batch_round_trip() {
        let mut b = sample_record();
        b.user_id = "other".into();
        b.score.death = Some(Death {
            time: 0.05,
            cause: DeathCause::Zone(1),
        });
        b.score.total_score = 0;
        b.score.stars = 0;
        let records = vec![sample_record(), b];
        let bytes = encode_batch(&records);
        assert_eq!(decode_batch(&bytes).unwrap(), records);
        assert_eq!(decode_batch(&[]).unwrap(), vec![]);
        assert!(decode_batch(&bytes[..bytes.len() - 1]).is_err());
    }

    fn arb_record() -> impl Strategy<Value = PlayRecord> {
        let samples = prop::collection::vec((1e-4f64..0.1, -1.0f64..1.0, 0.0f64..400.0), 1..30);
        let death = prop_oneof![
            Just(None),
            (0.0f64..1.0, any::<u32>()).prop_map(|(time, z)| Some(Death {
                time,
                cause: DeathCause::Zone(z)
            })),
            (0.0f64..1.0).prop_map(|time| Some(Death {
                time,
                cause: DeathCause::Edge
            })),
        ];
        (
            "[a-z_0-9]{0,20}",
            "\\PC{0,12}",
            any::<i64>(),
            samples,
            0usize..6,
            (0.0f64..1.0, any::<i64>(), 0u8..4),
            death,
            prop::collection::vec(0.0f64..1.0, 0..50),
        )
            .prop_map(
                |(
                    level_id,
                    user_id,
                    timestamp_ms,
                    raw,
                    origin,
                    (f, total, stars),
                    death,
                    trace,
                )| {
                    let mut t = 0.0;
                    let mut samples = vec![ControlSample::new(0.0, raw[0].1, raw[0].2)];
                    for &(dt, x, a) in &raw {
                        t += dt;
                        samples.push(ControlSample::new(t, x, a));
                    }
                    PlayRecord {
                        level_id,
                        user_id,
                        timestamp_ms,
                        client_version: "test".into(),
                        path: ControlPath::new(samples, PathOrigin::ALL[origin]).unwrap(),
                        score: ScoreReport {
                            fidelity: f,
                            time_used: t,
                            time_penalty: 0.2 * f,
                            bonus_points: total.rem_euclid(100),
                            total_score: total,
                            stars,
                            death,
                            feedback_trace: trace,
                        },
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(r in arb_record()) {
            let bytes = encode_play(&r);
            let back = decode_play(&bytes).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(encode_play(&back), bytes);
        }

        #[test]
        fn garbage_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            let _ = decode_play(&bytes);
            let _ = decode_batch(&bytes);
        }
    }
}
