//! Seeded synthetic datasets in the ingest CSV formats.
//!
//! Four play-count shapes are available: a launch burst that settles onto a
//! plateau, an upward jitter with a short rapid-growth window, a flat line
//! with one multi-day spike, and heavy-tailed noise around a level.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, format_date, ArtistSeries, DailyCounts, SONGS_FILE, USER_ACTIONS_FILE};
use crate::seeds;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DOWNLOAD_RATE: f64 = 0.10;
pub const COLLECT_RATE: f64 = 0.05;

/// Day (0-based) from which `StabilizeAfterBurst` sits on its plateau.
pub const PLATEAU_START: usize = 40;
const GROWTH_START: usize = 30;
const GROWTH_DAYS: usize = 10;
const SPIKE_DAY: usize = 74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Archetype {
    StabilizeAfterBurst,
    JitterUpward,
    StableWithSpike,
    Unstable,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Self::StabilizeAfterBurst,
        Self::JitterUpward,
        Self::StableWithSpike,
        Self::Unstable,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeSpec {
    pub kind: Archetype,
    pub base_level: f64,
    /// Standard deviation of the additive noise, relative to `base_level`.
    pub noise_scale: f64,
    pub seed: u64,
}

impl ArchetypeSpec {
    fn validate(&self) -> Result<()> {
        if !(self.base_level > 0.0) {
            return Err(Error::invalid("archetype base level must be positive"));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::invalid("archetype noise scale must be non-negative"));
        }
        Ok(())
    }
}

fn shape(kind: Archetype, t: usize, base: f64) -> f64 {
    let tf = t as f64;
    match kind {
        Archetype::StabilizeAfterBurst => {
            if t >= PLATEAU_START {
                base
            } else {
                let decay = (-tf / 10.0).exp();
                base * (1.0 + 1.5 * decay + 0.4 * (tf * 0.9).sin() * decay.sqrt())
            }
        }
        Archetype::JitterUpward => {
            let growth = ((tf - GROWTH_START as f64) / GROWTH_DAYS as f64).clamp(0.0, 1.0);
            base * (1.0 + 0.004 * tf + 0.8 * growth) * (1.0 + 0.08 * (tf * 2.1).sin())
        }
        Archetype::StableWithSpike => {
            let z = (tf - SPIKE_DAY as f64) / 1.5;
            base * (1.0 + 3.0 * (-z * z).exp())
        }
        Archetype::Unstable => base,
    }
}

/// Daily play counts following `spec.kind`; deterministic per `spec.seed`.
pub fn generate_series(spec: &ArchetypeSpec, days: usize) -> Result<Vec<u64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let heavy = StudentT::new(3.0).expect("3 degrees of freedom");
    let out = (0..days)
        .map(|t| {
            let level = shape(spec.kind, t, spec.base_level);
            let v = match spec.kind {
                Archetype::Unstable => {
                    let swing: f64 = heavy.sample(&mut rng);
                    level * ((0.5 + spec.noise_scale) * swing.clamp(-4.0, 4.0)).exp()
                }
                _ => {
                    let eps: f64 = normal.sample(&mut rng);
                    level + spec.base_level * spec.noise_scale * eps
                }
            };
            v.round().max(0.0) as u64
        })
        .collect();
    Ok(out)
}

pub fn derived_counts(plays: u64) -> DailyCounts {
    DailyCounts {
        plays,
        downloads: (DOWNLOAD_RATE * plays as f64).floor() as u64,
        collects: (COLLECT_RATE * plays as f64).floor() as u64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitOptions {
    #[serde(with = "crate::ingest::ymd")]
    pub start_date: NaiveDate,
    /// Artist indices that receive songs but no actions at all.
    pub silent_artists: Vec<usize>,
    pub min_base_level: f64,
    pub max_base_level: f64,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            start_date: NaiveDate::from_ymd_opt(2015, 3, 1).expect("valid date"),
            silent_artists: Vec::new(),
            min_base_level: 20.0,
            max_base_level: 120.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticArtist {
    pub artist_id: String,
    pub spec: ArchetypeSpec,
    pub songs: Vec<String>,
    pub silent: bool,
    pub plays: Vec<u64>,
}

impl SyntheticArtist {
    /// The series ingest should reconstruct for this artist.
    pub fn expected_series(&self, start_date: NaiveDate) -> ArtistSeries {
        ArtistSeries {
            artist_id: self.artist_id.clone(),
            start_date,
            rows: self.plays.iter().map(|&p| derived_counts(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub master_seed: u64,
    pub n_artists: usize,
    pub days: usize,
    pub options: EmitOptions,
    pub artists: Vec<SyntheticArtist>,
}

fn hex_id(rng: &mut ChaCha8Rng) -> String {
    format!("{:016x}", rng.random::<u64>())
}

/// Generates `n_artists` artists over `days` days and writes
/// `user_actions.csv`, `songs.csv` and `manifest.json` into `out_dir`.
pub fn emit_dataset(n_artists: usize, days: usize, master_seed: u64, out_dir: &Path, opts: &EmitOptions) -> Result<DatasetManifest> {
    if days == 0 {
        return Err(Error::invalid("dataset needs at least one day"));
    }
    if !(opts.min_base_level > 0.0 && opts.max_base_level >= opts.min_base_level) {
        return Err(Error::invalid("base level range must be positive and ordered"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(master_seed, &[0x5EED]));

    let mut artists = Vec::with_capacity(n_artists);
    for i in 0..n_artists {
        let artist_id = hex_id(&mut rng);
        let n_songs = rng.random_range(1..=5);
        let songs = (0..n_songs).map(|_| hex_id(&mut rng)).collect();
        let spec = ArchetypeSpec {
            kind: Archetype::ALL[i % Archetype::ALL.len()],
            base_level: rng.random_range(opts.min_base_level..=opts.max_base_level).round(),
            noise_scale: rng.random_range(0.08..0.2),
            seed: seeds::derive(master_seed, &[i as u64]),
        };
        let silent = opts.silent_artists.contains(&i);
        let plays = if silent { vec![0; days] } else { generate_series(&spec, days)? };
        artists.push(SyntheticArtist {
            artist_id,
            spec,
            songs,
            silent,
            plays,
        });
    }

    write_songs(&out_dir.join(SONGS_FILE), &artists, &mut rng)?;
    write_actions(&out_dir.join(USER_ACTIONS_FILE), &artists, opts.start_date, &mut rng)?;

    let manifest = DatasetManifest {
        master_seed,
        n_artists,
        days,
        options: opts.clone(),
        artists,
    };
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_songs(path: &Path, artists: &[SyntheticArtist], rng: &mut ChaCha8Rng) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "song_id,artist_id,publish_time,init_plays,language,gender").map_err(io)?;
    for a in artists {
        let gender = rng.random_range(1..=3);
        for s in &a.songs {
            let published = NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date")
                + chrono::Days::new(rng.random_range(0..400));
            let init_plays: u32 = rng.random_range(0..2000);
            let language = [1, 2, 3][rng.random_range(0..3)];
            writeln!(out, "{s},{},{},{init_plays},{language},{gender}", a.artist_id, format_date(published)).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

fn write_actions(path: &Path, artists: &[SyntheticArtist], start: NaiveDate, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "song_id,artist_id,ds,gmt_create,action_type").map_err(io)?;
    let days = artists.first().map_or(0, |a| a.plays.len());
    for day in 0..days {
        let date = start + chrono::Days::new(day as u64);
        let ds = format_date(date);
        let midnight = date.and_time(NaiveTime::MIN).and_utc().timestamp();
        for a in artists {
            let counts = derived_counts(a.plays[day]);
            for (action, n) in [(1, counts.plays), (2, counts.downloads), (3, counts.collects)] {
                for _ in 0..n {
                    let song = &a.songs[rng.random_range(0..a.songs.len())];
                    let ts = midnight + rng.random_range(0..86_400i64);
                    writeln!(out, "{song},{},{ds},{ts},{action}", a.artist_id).map_err(io)?;
                }
            }
        }
    }
    out.flush().map_err(io)
}

/// Loads a generated dataset back through ingest over its full date range.
pub fn ingest_emitted(dir: &Path, manifest: &DatasetManifest) -> Result<Vec<ArtistSeries>> {
    let range = ingest::DateRange::from_start(manifest.options.start_date, manifest.days)?;
    let actions = ingest::parse_user_actions(dir.join(USER_ACTIONS_FILE))?;
    let songs = ingest::parse_song_meta(dir.join(SONGS_FILE))?;
    ingest::aggregate_daily(&actions, &songs, range)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: Archetype, noise: f64, seed: u64) -> ArchetypeSpec {
        ArchetypeSpec {
            kind,
            base_level: 1000.0,
            noise_scale: noise,
            seed,
        }
    }

    #[test]
    fn noise_free_burst_settles_exactly() {
        let s = generate_series(&spec(Archetype::StabilizeAfterBurst, 0.0, 1), 122).unwrap();
        assert!(s[PLATEAU_START..].iter().all(|v| *v == 1000));
        assert!(s[0] > 2000);
    }

    #[test]
    fn generation_is_deterministic_and_nonnegative() {
        for kind in Archetype::ALL {
            let a = generate_series(&spec(kind, 0.5, 7), 183).unwrap();
            assert_eq!(a, generate_series(&spec(kind, 0.5, 7), 183).unwrap());
            assert_ne!(a, generate_series(&spec(kind, 0.5, 8), 183).unwrap());
            assert_eq!(a.len(), 183);
        }
    }

    #[test]
    fn spike_and_growth_shapes() {
        let c = generate_series(&spec(Archetype::StableWithSpike, 0.0, 1), 122).unwrap();
        assert_eq!(c[10], 1000);
        assert!(c[SPIKE_DAY] >= 3900);
        assert!(c[SPIKE_DAY + 1] > 1500);
        let b = generate_series(&spec(Archetype::JitterUpward, 0.0, 1), 122).unwrap();
        let before: u64 = b[20..30].iter().sum();
        let after: u64 = b[45..55].iter().sum();
        assert!(after as f64 > 1.6 * before as f64);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let mut s = spec(Archetype::Unstable, 0.1, 1);
        s.base_level = 0.0;
        assert!(generate_series(&s, 10).is_err());
    }
}
