//! Matching open-air readings with under-glass readings.
//!
//! Every day-mode under-glass reading is paired with the nearest day-mode
//! open reading of the same node within the pairing window. Ties go to the
//! later open reading. One open reading may serve several glass readings.
//! Anything that ends up without a partner is reported, never dropped.

use std::collections::{BTreeMap, HashMap, VecDeque};

use chrono::{DateTime, TimeDelta, Utc};

use super::{LuxReading, Mode, Role};

pub const DEFAULT_PAIRING_WINDOW: TimeDelta = TimeDelta::seconds(5);

#[derive(Debug, Clone, PartialEq)]
pub struct ReadingPair {
    pub open: LuxReading,
    pub glass: LuxReading,
}

impl ReadingPair {
    pub fn node_id(&self) -> &str {
        &self.glass.node_id
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.glass.timestamp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairRejectReason {
    /// No partner of the other role inside the window.
    Unpaired,
    /// Open-air readings carry no meaning at night.
    OpenInNightMode,
}

impl PairRejectReason {
    pub fn code(self) -> &'static str {
        match self {
            PairRejectReason::Unpaired => "unpaired",
            PairRejectReason::OpenInNightMode => "open_in_night_mode",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedReading {
    pub reading: LuxReading,
    pub reason: PairRejectReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairingOutcome {
    pub pairs: Vec<ReadingPair>,
    pub rejects: Vec<RejectedReading>,
    /// Night-mode glass readings; these are compared against the LED reference.
    pub night: Vec<LuxReading>,
}

impl PairingOutcome {
    fn absorb(&mut self, other: PairingOutcome) {
        self.pairs.extend(other.pairs);
        self.rejects.extend(other.rejects);
        self.night.extend(other.night);
    }

    fn reject(&mut self, reading: LuxReading, reason: PairRejectReason) {
        self.rejects.push(RejectedReading { reading, reason });
    }
}

/// Index of the best open reading for a glass timestamp among `opens`
/// (sorted by timestamp). Nearest wins; ties go to the later reading.
fn best_open<'a, I>(opens: I, glass_ts: DateTime<Utc>, window: TimeDelta) -> Option<usize>
where
    I: IntoIterator<Item = &'a DateTime<Utc>>,
{
    let mut best: Option<(TimeDelta, DateTime<Utc>, usize)> = None;
    for (i, &ts) in opens.into_iter().enumerate() {
        let dist = (ts - glass_ts).abs();
        if dist > window {
            continue;
        }
        let better = match best {
            None => true,
            Some((d, t, _)) => dist < d || (dist == d && ts >= t),
        };
        if better {
            best = Some((dist, ts, i));
        }
    }
    best.map(|(_, _, i)| i)
}

/// Batch pairing over a complete stream.
pub fn pair_readings(stream: &[LuxReading], window: TimeDelta) -> PairingOutcome {
    let mut out = PairingOutcome::default();
    let mut by_node: BTreeMap<&str, (Vec<&LuxReading>, Vec<&LuxReading>)> = BTreeMap::new();

    for r in stream {
        match (r.mode, r.role) {
            (Mode::Night, Role::Open) => out.reject(r.clone(), PairRejectReason::OpenInNightMode),
            (Mode::Night, Role::UnderGlass) => out.night.push(r.clone()),
            (Mode::Day, Role::Open) => by_node.entry(&r.node_id).or_default().0.push(r),
            (Mode::Day, Role::UnderGlass) => by_node.entry(&r.node_id).or_default().1.push(r),
        }
    }

    for (_, (mut opens, mut glasses)) in by_node {
        opens.sort_by_key(|r| r.timestamp);
        glasses.sort_by_key(|r| r.timestamp);
        let mut used = vec![false; opens.len()];
        for g in glasses {
            let lo = opens.partition_point(|o| o.timestamp < g.timestamp - window);
            let hi = opens.partition_point(|o| o.timestamp <= g.timestamp + window);
            match best_open(opens[lo..hi].iter().map(|o| &o.timestamp), g.timestamp, window) {
                Some(i) => {
                    used[lo + i] = true;
                    out.pairs.push(ReadingPair {
                        open: opens[lo + i].clone(),
                        glass: g.clone(),
                    });
                }
                None => out.reject(g.clone(), PairRejectReason::Unpaired),
            }
        }
        for (o, used) in opens.into_iter().zip(used) {
            if !used {
                out.reject(o.clone(), PairRejectReason::Unpaired);
            }
        }
    }
    out
}

#[derive(Debug, Default)]
struct OpenSlot {
    reading: Option<LuxReading>,
    used: bool,
}

#[derive(Debug, Default)]
struct NodeState {
    // Both kept sorted by timestamp.
    opens: VecDeque<(DateTime<Utc>, OpenSlot)>,
    pending: VecDeque<LuxReading>,
    watermark: Option<DateTime<Utc>>,
}

impl NodeState {
    fn insert_open(&mut self, r: LuxReading) {
        let pos = self.opens.partition_point(|(ts, _)| *ts <= r.timestamp);
        self.opens.insert(
            pos,
            (
                r.timestamp,
                OpenSlot {
                    reading: Some(r),
                    used: false,
                },
            ),
        );
    }

    fn insert_glass(&mut self, r: LuxReading) {
        let pos = self.pending.partition_point(|g| g.timestamp <= r.timestamp);
        self.pending.insert(pos, r);
    }

    /// Finalize every glass whose best partner can no longer change.
    /// `None` watermark means end of stream.
    fn resolve(&mut self, window: TimeDelta, end: bool, out: &mut PairingOutcome) {
        let wm = self.watermark;
        let mut keep = VecDeque::with_capacity(self.pending.len());
        while let Some(g) = self.pending.pop_front() {
            let best = best_open(self.opens.iter().map(|(ts, _)| ts), g.timestamp, window);
            let final_ = end
                || match (best, wm) {
                    (_, None) => false,
                    (None, Some(wm)) => wm > g.timestamp + window,
                    (Some(i), Some(wm)) => {
                        let ots = self.opens[i].0;
                        if ots >= g.timestamp {
                            true
                        } else {
                            wm > g.timestamp + (g.timestamp - ots)
                        }
                    }
                };
            if !final_ {
                keep.push_back(g);
                continue;
            }
            match best {
                Some(i) => {
                    let slot = &mut self.opens[i].1;
                    slot.used = true;
                    out.pairs.push(ReadingPair {
                        open: slot.reading.clone().expect("open slot populated"),
                        glass: g,
                    });
                }
                None => out.reject(g, PairRejectReason::Unpaired),
            }
        }
        self.pending = keep;

        // An open reading can only matter to glass readings within one window
        // of it, and those are final once the watermark is two windows past it.
        while let Some((ts, _)) = self.opens.front() {
            let expired = end || wm.is_some_and(|wm| wm > *ts + window + window);
            if !expired {
                break;
            }
            let (_, slot) = self.opens.pop_front().expect("front exists");
            if !slot.used {
                out.reject(
                    slot.reading.expect("open slot populated"),
                    PairRejectReason::Unpaired,
                );
            }
        }
    }
}

/// Incremental pairing for live ingestion.
///
/// For streams that are time-sorted per node, `push` for every reading
/// followed by `flush` yields the same pairs and rejects as
/// [`pair_readings`] over the whole stream.
#[derive(Debug)]
pub struct Pairer {
    window: TimeDelta,
    nodes: HashMap<String, NodeState>,
}

impl Pairer {
    pub fn new(window: TimeDelta) -> Self {
        Self {
            window,
            nodes: HashMap::new(),
        }
    }

    pub fn window(&self) -> TimeDelta {
        self.window
    }

    pub fn push(&mut self, reading: LuxReading) -> PairingOutcome {
        let mut out = PairingOutcome::default();
        match (reading.mode, reading.role) {
            (Mode::Night, Role::Open) => {
                out.reject(reading, PairRejectReason::OpenInNightMode);
                return out;
            }
            (Mode::Night, Role::UnderGlass) => {
                out.night.push(reading);
                return out;
            }
            _ => {}
        }
        let node = self.nodes.entry(reading.node_id.clone()).or_default();
        node.watermark = Some(match node.watermark {
            Some(wm) => wm.max(reading.timestamp),
            None => reading.timestamp,
        });
        match reading.role {
            Role::Open => node.insert_open(reading),
            Role::UnderGlass => node.insert_glass(reading),
        }
        node.resolve(self.window, false, &mut out);
        out
    }

    /// Finalize everything still buffered, e.g. at end of a replay or on shutdown.
    pub fn flush(&mut self) -> PairingOutcome {
        let mut out = PairingOutcome::default();
        let mut names: Vec<_> = self.nodes.keys().cloned().collect();
        names.sort();
        for name in names {
            let mut node = self.nodes.remove(&name).expect("key listed");
            let mut part = PairingOutcome::default();
            node.resolve(self.window, true, &mut part);
            out.absorb(part);
        }
        out
    }

    /// Number of readings still waiting for a decision.
    pub fn buffered(&self) -> usize {
        self.nodes
            .values()
            .map(|n| n.pending.len() + n.opens.len())
            .sum()
    }
}
