//! Raw Tianchi-style logs to per-artist daily count series.
//!
//! Two CSV inputs are accepted, both headerless or with a literal header row:
//!
//! - user actions: `song_id,artist_id,ds,gmt_create,action_type`
//! - songs: `song_id,artist_id,publish_time[,init_plays],language,gender`
//!
//! Dates are `YYYYMMDD`. Inside a series a day is addressed by its offset
//! from `start_date`, so gaps are plain integer arithmetic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y%m%d";

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).ok()
}

pub fn format_date(d: NaiveDate) -> String {
    d.format(DATE_FORMAT).to_string()
}

pub(crate) mod ymd {
    use chrono::NaiveDate;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_date(*d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_date(&raw).ok_or_else(|| de::Error::custom(format!("bad date {raw:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionType {
    Play = 1,
    Download = 2,
    Collect = 3,
}

impl ActionType {
    pub fn code(self) -> u8 {
        self as u8
    }

    fn from_code(raw: &str) -> Option<Self> {
        match raw.trim() {
            "1" => Some(Self::Play),
            "2" => Some(Self::Download),
            "3" => Some(Self::Collect),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserAction {
    pub song_id: String,
    pub artist_id: String,
    pub ds: NaiveDate,
    /// Kept for format fidelity; aggregation ignores it.
    pub gmt_create: String,
    pub action_type: ActionType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male = 1,
    Female = 2,
    Combination = 3,
}

impl Gender {
    fn from_code(raw: &str) -> Option<Self> {
        match raw.trim() {
            "1" => Some(Self::Male),
            "2" => Some(Self::Female),
            "3" => Some(Self::Combination),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SongMeta {
    pub song_id: String,
    pub artist_id: String,
    pub publish_time: String,
    pub init_plays: Option<u64>,
    pub language: u32,
    pub gender: Gender,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCounts {
    pub plays: u64,
    pub downloads: u64,
    pub collects: u64,
}

impl DailyCounts {
    pub fn new(plays: u64, downloads: u64, collects: u64) -> Self {
        Self {
            plays,
            downloads,
            collects,
        }
    }
}

/// Contiguous daily counts for one artist, starting at `start_date`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistSeries {
    pub artist_id: String,
    #[serde(with = "ymd")]
    pub start_date: NaiveDate,
    pub rows: Vec<DailyCounts>,
}

impl ArtistSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total_plays(&self) -> u64 {
        self.rows.iter().map(|r| r.plays).sum()
    }

    pub fn plays(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.plays as f64).collect()
    }

    /// Sub-series of `len` days beginning `offset` days after `start_date`.
    pub fn segment(&self, offset: usize, len: usize) -> ArtistSeries {
        ArtistSeries {
            artist_id: self.artist_id.clone(),
            start_date: self.start_date + chrono::Days::new(offset as u64),
            rows: self.rows[offset..offset + len].to_vec(),
        }
    }
}

/// Inclusive calendar range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    #[serde(with = "ymd")]
    pub start: NaiveDate,
    #[serde(with = "ymd")]
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::invalid(format!(
                "date range ends ({end}) before it starts ({start})"
            )));
        }
        Ok(Self { start, end })
    }

    /// Range of `days` days beginning at `start`.
    pub fn from_start(start: NaiveDate, days: usize) -> Result<Self> {
        if days == 0 {
            return Err(Error::invalid("date range must span at least one day"));
        }
        Self::new(start, start + chrono::Days::new(days as u64 - 1))
    }

    pub fn days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    /// Offset of `d` from the range start, if inside the range.
    pub fn offset(&self, d: NaiveDate) -> Option<usize> {
        (d >= self.start && d <= self.end).then(|| (d - self.start).num_days() as usize)
    }
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn is_header(record: &csv::StringRecord) -> bool {
    record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("song_id"))
}

pub fn parse_user_actions(path: impl AsRef<Path>) -> Result<Vec<UserAction>> {
    read_user_actions(open(path.as_ref())?)
}

pub fn read_user_actions<R: Read>(input: R) -> Result<Vec<UserAction>> {
    let mut out = Vec::new();
    for (idx, record) in csv_reader(input).records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if idx == 0 && is_header(&record) {
            continue;
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 5 {
            return Err(Error::Malformed {
                line,
                reason: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let ds = parse_date(&record[2]).ok_or_else(|| Error::Malformed {
            line,
            reason: format!("invalid ds {:?}", &record[2]),
        })?;
        let action_type =
            ActionType::from_code(&record[4]).ok_or_else(|| Error::UnknownActionType {
                line,
                code: record[4].to_string(),
            })?;
        if record[0].is_empty() || record[1].is_empty() {
            return Err(Error::Malformed {
                line,
                reason: "empty song_id or artist_id".into(),
            });
        }
        out.push(UserAction {
            song_id: record[0].to_string(),
            artist_id: record[1].to_string(),
            ds,
            gmt_create: record[3].to_string(),
            action_type,
        });
    }
    Ok(out)
}

pub fn parse_song_meta(path: impl AsRef<Path>) -> Result<Vec<SongMeta>> {
    read_song_meta(open(path.as_ref())?)
}

pub fn read_song_meta<R: Read>(input: R) -> Result<Vec<SongMeta>> {
    let mut out = Vec::new();
    let mut owner: HashMap<String, String> = HashMap::new();
    for (idx, record) in csv_reader(input).records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if idx == 0 && is_header(&record) {
            continue;
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let malformed = |reason: String| Error::Malformed { line, reason };
        // With init_plays: 6 columns; without: 5.
        let (init_plays, lang_col) = match record.len() {
            6 => {
                let raw = &record[3];
                let v = if raw.is_empty() {
                    None
                } else {
                    Some(
                        raw.parse::<u64>()
                            .map_err(|_| malformed(format!("invalid init_plays {raw:?}")))?,
                    )
                };
                (v, 4)
            }
            5 => (None, 3),
            n => return Err(malformed(format!("expected 5 or 6 fields, found {n}"))),
        };
        let language = record[lang_col]
            .parse::<u32>()
            .map_err(|_| malformed(format!("invalid language {:?}", &record[lang_col])))?;
        let gender = Gender::from_code(&record[lang_col + 1])
            .ok_or_else(|| malformed(format!("invalid gender {:?}", &record[lang_col + 1])))?;
        let song_id = record[0].to_string();
        let artist_id = record[1].to_string();
        if song_id.is_empty() || artist_id.is_empty() {
            return Err(malformed("empty song_id or artist_id".into()));
        }
        match owner.get(&song_id) {
            Some(prev) if *prev != artist_id => {
                return Err(Error::ConflictingOwnership {
                    song: song_id,
                    first: prev.clone(),
                    second: artist_id,
                })
            }
            Some(_) => {}
            None => {
                owner.insert(song_id.clone(), artist_id.clone());
            }
        }
        out.push(SongMeta {
            song_id,
            artist_id,
            publish_time: record[2].to_string(),
            init_plays,
            language,
            gender,
        });
    }
    Ok(out)
}

/// Sums actions per artist and day over `range`, zero-filling silent days.
///
/// One series is produced for every artist that owns a song, sorted by
/// artist id. Actions dated outside `range` are ignored; actions whose song
/// is not in `songs` are an error.
pub fn aggregate_daily(
    actions: &[UserAction],
    songs: &[SongMeta],
    range: DateRange,
) -> Result<Vec<ArtistSeries>> {
    let owner: HashMap<&str, &str> = songs
        .iter()
        .map(|s| (s.song_id.as_str(), s.artist_id.as_str()))
        .collect();
    let days = range.days();
    let mut series: BTreeMap<&str, Vec<DailyCounts>> = songs
        .iter()
        .map(|s| (s.artist_id.as_str(), vec![DailyCounts::default(); days]))
        .collect();

    let mut orphans = BTreeSet::new();
    for a in actions {
        let Some(artist) = owner.get(a.song_id.as_str()) else {
            orphans.insert(a.song_id.clone());
            continue;
        };
        let Some(day) = range.offset(a.ds) else {
            continue;
        };
        let row = &mut series.get_mut(artist).expect("artist registered from songs")[day];
        match a.action_type {
            ActionType::Play => row.plays += 1,
            ActionType::Download => row.downloads += 1,
            ActionType::Collect => row.collects += 1,
        }
    }
    if !orphans.is_empty() {
        return Err(Error::OrphanSongs(orphans.into_iter().collect()));
    }

    Ok(series
        .into_iter()
        .map(|(artist, rows)| ArtistSeries {
            artist_id: artist.to_string(),
            start_date: range.start,
            rows,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<ArtistSeries>,
    /// (artist_id, total plays) of every dropped artist.
    pub dropped: Vec<(String, u64)>,
}

/// Drops artists whose total plays fall below `min_total_plays`.
pub fn filter_artists(series: Vec<ArtistSeries>, min_total_plays: u64) -> FilterOutcome {
    let (kept, dropped): (Vec<_>, Vec<_>) = series
        .into_iter()
        .partition(|s| s.total_plays() >= min_total_plays);
    FilterOutcome {
        kept,
        dropped: dropped
            .into_iter()
            .map(|s| {
                let total = s.total_plays();
                (s.artist_id, total)
            })
            .collect(),
    }
}

/// Reads both files from `dir` (`user_actions.csv`, `songs.csv`), aggregates
/// over `range` and applies the plays threshold.
pub fn load_dataset(dir: &Path, range: DateRange, min_total_plays: u64) -> Result<FilterOutcome> {
    let actions = parse_user_actions(dir.join(USER_ACTIONS_FILE))?;
    let songs = parse_song_meta(dir.join(SONGS_FILE))?;
    let series = aggregate_daily(&actions, &songs, range)?;
    Ok(filter_artists(series, min_total_plays))
}

pub const USER_ACTIONS_FILE: &str = "user_actions.csv";
pub const SONGS_FILE: &str = "songs.csv";
