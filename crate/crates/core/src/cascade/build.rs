use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Interner, NodeId, RepostEvent, NO_SOURCE};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adoption {
    pub node: NodeId,
    /// Minutes since the seed post.
    pub time: f64,
    /// Adopter this one reposted from; `None` only for the seed.
    pub source: Option<NodeId>,
}

/// One original post and its reposts, ordered by adoption time. The seed is
/// always first, at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub root_message_id: String,
    pub adoptions: Vec<Adoption>,
}

impl Cascade {
    pub fn seed_adopter(&self) -> NodeId {
        self.adoptions[0].node
    }

    /// Number of adopters, seed included.
    pub fn final_size(&self) -> usize {
        self.adoptions.len()
    }

    /// Checks ordering and source invariants; `strict` additionally requires
    /// strictly increasing times (as guaranteed after [`jitter_times`]).
    pub fn check_invariants(&self, strict: bool) -> std::result::Result<(), String> {
        let first = self.adoptions.first().ok_or("empty cascade")?;
        if first.time != 0.0 || first.source.is_some() {
            return Err("seed must adopt at time 0 without a source".into());
        }
        let mut seen = HashSet::new();
        for (i, a) in self.adoptions.iter().enumerate() {
            if i > 0 {
                let prev = self.adoptions[i - 1].time;
                if a.time < prev || (strict && a.time <= prev) {
                    return Err(format!("adoption {i} out of order"));
                }
                match a.source {
                    Some(s) if seen.contains(&s) => {}
                    _ => return Err(format!("adoption {i} source does not precede it")),
                }
            }
            if !seen.insert(a.node) {
                return Err(format!("adopter {} appears twice", a.node));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct CascadeSet {
    /// Sorted by root message id.
    pub cascades: Vec<Cascade>,
    /// Reposts whose root post never appears in the log.
    pub orphans: Vec<RepostEvent>,
    /// Reposts timestamped before their root post.
    pub dropped_early: usize,
    /// Reposts whose source had not adopted earlier; credited to the seed.
    pub reattributed: usize,
}

/// Orders one group of equal-time adopters so that sources come first.
fn order_tie_group(group: &mut Vec<Adoption>) {
    if group.len() < 2 {
        return;
    }
    let mut remaining = std::mem::take(group);
    while !remaining.is_empty() {
        let pending: HashSet<NodeId> = remaining.iter().map(|a| a.node).collect();
        let pick = remaining
            .iter()
            .position(|a| a.source.is_none_or(|s| !pending.contains(&s)))
            .unwrap_or(0);
        group.push(remaining.remove(pick));
    }
}

/// Rebuilds one cascade per original post in `events`.
///
/// Times become minutes since the original post; each adopter keeps only its
/// earliest repost. Unknown uids are added to `names` in sorted order, so ids
/// do not depend on event order.
pub fn build_cascades<'a>(events: impl IntoIterator<Item = &'a RepostEvent>, names: &mut Interner) -> CascadeSet {
    let mut roots: BTreeMap<&str, &RepostEvent> = BTreeMap::new();
    let mut reposts: HashMap<&str, Vec<&RepostEvent>> = HashMap::new();
    for ev in events {
        if ev.is_original() {
            let slot = roots.entry(ev.message_id.as_str()).or_insert(ev);
            if ev.timestamp < slot.timestamp {
                *slot = ev;
            }
        } else {
            reposts.entry(ev.root_message_id.as_str()).or_default().push(ev);
        }
    }

    let mut fresh: Vec<&str> = roots
        .values()
        .map(|e| e.reposter.as_str())
        .chain(reposts.values().flatten().flat_map(|e| [e.reposter.as_str(), e.source.as_deref().unwrap_or(NO_SOURCE)]))
        .filter(|u| *u != NO_SOURCE && names.get(u).is_none())
        .collect();
    fresh.sort_unstable();
    fresh.dedup();
    for u in fresh {
        names.intern(u);
    }

    let mut set = CascadeSet::default();
    let mut orphan_roots: Vec<&str> = reposts.keys().copied().filter(|r| !roots.contains_key(r)).collect();
    orphan_roots.sort_unstable();
    for r in orphan_roots {
        let mut evs: Vec<RepostEvent> = reposts[r].iter().map(|e| (*e).clone()).collect();
        evs.sort_by(|a, b| (a.timestamp, &a.message_id).cmp(&(b.timestamp, &b.message_id)));
        set.orphans.extend(evs);
    }
    if !set.orphans.is_empty() {
        log::warn!("{} reposts reference unknown root posts", set.orphans.len());
    }

    for (root_id, root) in roots {
        let seed_node = names.get(&root.reposter).expect("interned above");
        let mut earliest: HashMap<NodeId, (i64, NodeId)> = HashMap::new();
        for ev in reposts.get(root_id).map(Vec::as_slice).unwrap_or(&[]) {
            if ev.timestamp < root.timestamp {
                set.dropped_early += 1;
                continue;
            }
            let node = names.get(&ev.reposter).unwrap();
            if node == seed_node {
                continue;
            }
            let src = names.get(ev.source.as_deref().unwrap()).unwrap();
            let entry = earliest.entry(node).or_insert((ev.timestamp, src));
            if (ev.timestamp, src) < *entry {
                *entry = (ev.timestamp, src);
            }
        }
        let mut adoptions: Vec<Adoption> = earliest
            .into_iter()
            .map(|(node, (ts, src))| Adoption {
                node,
                time: (ts - root.timestamp) as f64 / 60.0,
                source: Some(src),
            })
            .collect();
        adoptions.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.node.cmp(&b.node)));

        let mut ordered = vec![Adoption {
            node: seed_node,
            time: 0.0,
            source: None,
        }];
        let mut i = 0;
        while i < adoptions.len() {
            let j = adoptions[i..].iter().position(|a| a.time != adoptions[i].time).map_or(adoptions.len(), |k| i + k);
            let mut group = adoptions[i..j].to_vec();
            order_tie_group(&mut group);
            ordered.extend(group);
            i = j;
        }
        let mut adopted: HashSet<NodeId> = HashSet::new();
        for a in ordered.iter_mut() {
            if let Some(s) = a.source {
                if !adopted.contains(&s) {
                    a.source = Some(seed_node);
                    set.reattributed += 1;
                }
            }
            adopted.insert(a.node);
        }
        set.cascades.push(Cascade {
            root_message_id: root_id.to_string(),
            adoptions: ordered,
        });
    }
    set
}

/// Width of the jitter interval, in minutes.
const JITTER: f64 = 1e-6;

/// Adds a small positive offset to every non-seed adoption time so that all
/// times become unique.
///
/// Offsets lie in `(0, 1e-6)` minutes, come from a generator keyed by
/// `(root_message_id, adoption index, seed)`, and are assigned in list order
/// within each group of equal times, so list order is preserved. Offsets are
/// shrunk when the next distinct time is closer than the interval width.
pub fn jitter_times(c: &Cascade, seed: u64) -> Cascade {
    let root_key = seed::hash_str(&c.root_message_id);
    let mut draws: Vec<f64> = (0..c.adoptions.len())
        .map(|i| {
            let mut rng = seed::rng(seed, &[root_key, i as u64]);
            loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            }
        })
        .collect();

    let mut out = c.clone();
    let n = out.adoptions.len();
    let mut i = 1;
    while i < n {
        let base = c.adoptions[i].time;
        let j = (i..n).find(|&k| c.adoptions[k].time != base).unwrap_or(n);
        let scale = if j < n { ((c.adoptions[j].time - base) / JITTER).min(1.0) } else { 1.0 };
        let group = &mut draws[i..j];
        group.sort_by(f64::total_cmp);
        let mut prev = base;
        for (k, u) in (i..j).zip(group.iter()) {
            let mut t = base + u * JITTER * scale;
            if t <= prev {
                t = prev.next_up();
            }
            out.adoptions[k].time = t;
            prev = t;
        }
        i = j;
    }
    out
}

/// Writes `root_message_id <TAB> uid <TAB> adoption_time_min <TAB> source_uid`.
pub fn write_cascades<W: Write>(mut w: W, cascades: &[Cascade], names: &Interner) -> std::io::Result<()> {
    for c in cascades {
        for a in &c.adoptions {
            let src = a.source.map_or(NO_SOURCE, |s| names.uid(s));
            writeln!(w, "{}\t{}\t{}\t{}", c.root_message_id, names.uid(a.node), a.time, src)?;
        }
    }
    Ok(())
}

/// Reads a cascade store. Rows of one cascade must be contiguous and in
/// adoption order; unknown uids are interned.
pub fn read_cascades<R: BufRead>(reader: R, label: &str, names: &mut Interner) -> Result<Vec<Cascade>> {
    let mut out: Vec<Cascade> = Vec::new();
    let mut finished: HashSet<String> = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(label, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: label.to_string(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [root, uid, time, source] = fields[..] else {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let time: f64 = time.parse().map_err(|_| err(format!("invalid adoption time `{time}`")))?;
        if !time.is_finite() {
            return Err(err("adoption time must be finite".into()));
        }
        let adoption = Adoption {
            node: names.intern(uid),
            time,
            source: (source != NO_SOURCE).then(|| names.intern(source)),
        };
        match out.last_mut() {
            Some(c) if c.root_message_id == root => c.adoptions.push(adoption),
            _ => {
                if let Some(prev) = out.last() {
                    finished.insert(prev.root_message_id.clone());
                }
                if finished.contains(root) {
                    return Err(err(format!("rows of cascade `{root}` are not contiguous")));
                }
                out.push(Cascade {
                    root_message_id: root.to_string(),
                    adoptions: vec![adoption],
                });
            }
        }
    }
    for c in &out {
        c.check_invariants(false)
            .map_err(|m| Error::InvalidInput(format!("{label}: cascade `{}`: {m}", c.root_message_id)))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev_orig(id: &str, who: &str, ts: i64) -> RepostEvent {
        RepostEvent::original(id, who, ts)
    }

    fn ev_rep(id: &str, root: &str, who: &str, from: &str, ts: i64) -> RepostEvent {
        RepostEvent::repost(id, root, who, from, ts)
    }

    fn trace(c: &Cascade, names: &Interner) -> Vec<(String, f64)> {
        c.adoptions.iter().map(|a| (names.uid(a.node).to_string(), a.time)).collect()
    }

    #[test]
    fn hand_traced_cascade() {
        let events = vec![
            ev_orig("m", "a", 1000),
            ev_rep("r2", "m", "c", "b", 1000 + 12 * 60),
            ev_rep("r1", "m", "b", "a", 1000 + 5 * 60),
        ];
        let mut names = Interner::new();
        let set = build_cascades(&events, &mut names);
        assert_eq!(set.cascades.len(), 1);
        let c = &set.cascades[0];
        assert_eq!(c.final_size(), 3);
        assert_eq!(trace(c, &names), vec![("a".into(), 0.0), ("b".into(), 5.0), ("c".into(), 12.0)]);
        c.check_invariants(true).unwrap();
    }

    #[test]
    fn seed_without_reposts() {
        let mut names = Interner::new();
        let set = build_cascades(&[ev_orig("m", "a", 0)], &mut names);
        assert_eq!(set.cascades[0].final_size(), 1);
    }

    #[test]
    fn earliest_adoption_wins() {
        let events = vec![ev_orig("m", "a", 0), ev_rep("r2", "m", "b", "a", 540), ev_rep("r1", "m", "b", "a", 300)];
        let mut names = Interner::new();
        let set = build_cascades(&events, &mut names);
        assert_eq!(trace(&set.cascades[0], &names), vec![("a".into(), 0.0), ("b".into(), 5.0)]);
    }

    #[test]
    fn orphans_and_early_reposts_are_reported() {
        let events = vec![ev_orig("m", "a", 100), ev_rep("x", "gone", "b", "a", 5), ev_rep("y", "m", "c", "a", 50)];
        let mut names = Interner::new();
        let set = build_cascades(&events, &mut names);
        assert_eq!(set.orphans.len(), 1);
        assert_eq!(set.dropped_early, 1);
        assert_eq!(set.cascades[0].final_size(), 1);
    }

    #[test]
    fn tie_groups_put_sources_first() {
        // c reposts from b at the same second b reposts from a
        let events = vec![ev_orig("m", "a", 0), ev_rep("r2", "m", "b", "c", 60), ev_rep("r1", "m", "c", "a", 60)];
        let mut names = Interner::new();
        let set = build_cascades(&events, &mut names);
        let c = &set.cascades[0];
        assert_eq!(trace(c, &names)[1].0, "c");
        c.check_invariants(false).unwrap();
        assert_eq!(set.reattributed, 0);
    }

    #[test]
    fn unknown_source_is_credited_to_seed() {
        let events = vec![ev_orig("m", "a", 0), ev_rep("r", "m", "b", "ghost", 60)];
        let mut names = Interner::new();
        let set = build_cascades(&events, &mut names);
        assert_eq!(set.reattributed, 1);
        assert_eq!(set.cascades[0].adoptions[1].source, names.get("a"));
    }

    #[test]
    fn build_is_order_independent() {
        let mut events = vec![
            ev_orig("m", "a", 0),
            ev_rep("r1", "m", "b", "a", 60),
            ev_rep("r2", "m", "c", "b", 120),
            ev_orig("n", "z", 10),
            ev_rep("r3", "n", "y", "z", 70),
        ];
        let mut n1 = Interner::new();
        let s1 = build_cascades(&events, &mut n1);
        events.reverse();
        let mut n2 = Interner::new();
        let s2 = build_cascades(&events, &mut n2);
        assert_eq!(s1.cascades, s2.cascades);
        assert_eq!(n1, n2);
    }

    fn tied_cascade() -> Cascade {
        let a = |node: u32, time: f64, src: Option<u32>| Adoption {
            node: NodeId(node),
            time,
            source: src.map(NodeId),
        };
        Cascade {
            root_message_id: "m".into(),
            adoptions: vec![a(0, 0.0, None), a(1, 0.0, Some(0)), a(2, 5.0, Some(0)), a(3, 5.0, Some(2)), a(4, 7.0, Some(1))],
        }
    }

    #[test]
    fn jitter_breaks_ties_within_bound() {
        let j = jitter_times(&tied_cascade(), 9);
        let t: Vec<f64> = j.adoptions.iter().map(|a| a.time).collect();
        assert_eq!(t[0], 0.0);
        assert!(t[1] > 0.0 && t[1] < 1e-6);
        assert!(t[2] > 5.0 && t[2] < 5.000001);
        assert!(t[3] > t[2] && t[3] < 5.000001);
        assert!(t[4] > 7.0 && t[4] < 7.000001);
        j.check_invariants(true).unwrap();
    }

    #[test]
    fn jitter_is_deterministic_and_order_preserving() {
        let c = tied_cascade();
        assert_eq!(jitter_times(&c, 3), jitter_times(&c, 3));
        assert_ne!(jitter_times(&c, 3), jitter_times(&c, 4));
        let nodes: Vec<NodeId> = jitter_times(&c, 3).adoptions.iter().map(|a| a.node).collect();
        assert_eq!(nodes, c.adoptions.iter().map(|a| a.node).collect::<Vec<_>>());
    }

    #[test]
    fn jitter_respects_close_distinct_times() {
        let mut c = tied_cascade();
        c.adoptions[4].time = 5.0 + 1e-8;
        let j = jitter_times(&c, 1);
        assert!(j.adoptions[3].time < j.adoptions[4].time);
        j.check_invariants(true).unwrap();
    }

    #[test]
    fn store_round_trip() {
        let mut names = Interner::new();
        for u in ["a", "b", "c", "d", "e"] {
            names.intern(u);
        }
        let cs = vec![jitter_times(&tied_cascade(), 5)];
        let mut buf = Vec::new();
        write_cascades(&mut buf, &cs, &names).unwrap();
        let mut names2 = names.clone();
        assert_eq!(read_cascades(&buf[..], "mem", &mut names2).unwrap(), cs);
    }

    #[test]
    fn store_rejects_split_cascades() {
        let text = "m\ta\t0\t-\nn\tb\t0\t-\nm\tc\t1\ta\n";
        let mut names = Interner::new();
        assert!(read_cascades(text.as_bytes(), "mem", &mut names).is_err());
    }
}
