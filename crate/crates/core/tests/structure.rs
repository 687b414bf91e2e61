//! Structural validation of the critical-height machinery: every height the
//! enumeration reports must change the fixed-height schedule structure, and
//! a dense probe scan must find no change the enumeration missed.

use taut_core::height::{critical_heights, critical_heights_buffered, search_bounds, CriticalSide};
use taut_core::model::{BusyInterval, PhysicalParams, Scenario, Task};
use taut_core::solve::{rates_for_height, rates_for_height_buffered};

fn params() -> PhysicalParams {
    PhysicalParams {
        alpha: 1e-28,
        cycles_per_bit: 500.0,
        noise_power: 10f64.powf((-79.5 - 30.0) / 10.0),
        channel_gain: 1e-3,
        bandwidth: 1e7,
    }
}

fn scenario(tasks: &[(f64, f64)], busy: (f64, f64), buffer: Option<f64>) -> Scenario {
    Scenario::new(
        tasks
            .iter()
            .map(|&(deadline, data)| Task { deadline, data })
            .collect(),
        Some(BusyInterval {
            start: busy.0,
            end: busy.1,
        }),
        params(),
        buffer,
    )
    .unwrap()
}

/// Breakpoint fingerprint of the schedule pair at height `h`.
fn fingerprint(s: &Scenario, h: f64) -> Vec<i64> {
    let (sn, tx) = if s.buffer().is_some() {
        rates_for_height_buffered(s, h).unwrap()
    } else {
        rates_for_height(s, h).unwrap()
    };
    let mut f = vec![sn.segments().len() as i64, tx.segments().len() as i64];
    for seg in sn.segments().iter().chain(tx.segments()) {
        f.push((seg.start * 1e6).round() as i64);
    }
    f
}

/// Locates every height in `(lo, hi)` where the fingerprint changes, by
/// scanning `n` points and bisecting each change. Clusters of changes whose
/// outer fingerprints agree are canonicalization flicker (two rates crossing
/// through the merge band) and are dropped.
fn probe_changes(s: &Scenario, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let nudge = (hi - lo) * 1e-9;
    let mut raw = vec![];
    let mut prev_h = lo + nudge;
    let mut prev_f = fingerprint(s, prev_h);
    for i in 1..=n {
        let h = (lo + (hi - lo) * i as f64 / n as f64).min(hi - nudge);
        let f = fingerprint(s, h);
        if f != prev_f {
            let (mut a, mut b) = (prev_h, h);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if fingerprint(s, m) == prev_f {
                    a = m;
                } else {
                    b = m;
                }
            }
            raw.push(0.5 * (a + b));
        }
        prev_f = f;
        prev_h = h;
    }
    let gap = 1e-4 * (hi - lo);
    let mut out = vec![];
    let mut i = 0;
    while i < raw.len() {
        let mut j = i;
        while j + 1 < raw.len() && raw[j + 1] - raw[j] < gap {
            j += 1;
        }
        let below = fingerprint(s, (raw[i] - gap).max(lo + nudge));
        let above = fingerprint(s, (raw[j] + gap).min(hi - nudge));
        if below != above {
            out.push(0.5 * (raw[i] + raw[j]));
        }
        i = j + 1;
    }
    out
}

fn assert_enumeration_matches_probe(s: &Scenario, label: &str) {
    let bounds = search_bounds(s).unwrap();
    if bounds.upper - bounds.lower <= 1e-6 * s.total_data() {
        return;
    }
    let enumerated: Vec<f64> = if s.buffer().is_some() {
        critical_heights_buffered(s, &bounds).unwrap()
    } else {
        critical_heights(s, &bounds)
    }
    .iter()
    .map(|c| c.height)
    .collect();
    let probed = probe_changes(s, bounds.lower, bounds.upper, 2000);
    let tol = 1e-5 * s.total_data();
    // Changes hugging a bound are the bound's own structure (the ceiling
    // contact at the upper bound turns tangent there), not interior events.
    let edge = 1e-4 * (bounds.upper - bounds.lower) + 1e-9 * s.total_data();
    for p in &probed {
        if *p <= bounds.lower + edge || *p >= bounds.upper - edge {
            continue;
        }
        assert!(
            enumerated.iter().any(|e| (e - p).abs() < tol),
            "{label}: probe found an unlisted structure change at h = {p} \
             (enumerated {enumerated:?}, bounds {bounds:?})"
        );
    }
    for e in &enumerated {
        if *e <= bounds.lower + edge || *e >= bounds.upper - edge {
            continue;
        }
        assert!(
            probed.iter().any(|p| (e - p).abs() < tol),
            "{label}: enumerated height {e} changes nothing \
             (probed {probed:?}, bounds {bounds:?})"
        );
    }
}

struct Lcg(u64);

impl Lcg {
    fn pick(&mut self, n: usize) -> usize {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) as usize) % n
    }
}

fn random_scenario(rng: &mut Lcg, buffered: bool) -> Option<Scenario> {
    let n_tasks = 2 + rng.pick(4);
    let mut t = 0.0;
    let mut tasks = vec![];
    for _ in 0..n_tasks {
        t += 10.0 + 15.0 * rng.pick(5) as f64;
        tasks.push((t, [0.0, 100.0, 300.0, 500.0, 900.0, 1500.0][rng.pick(6)]));
    }
    if tasks.iter().map(|x| x.1).sum::<f64>() <= 0.0 {
        return None;
    }
    let horizon = t;
    let b1 = 2.0 + (horizon * 0.4) * rng.pick(7) as f64 / 7.0;
    let b2 = b1 + 3.0 + (horizon - b1 - 4.0) * rng.pick(5) as f64 / 6.0;
    if b2 >= horizon {
        return None;
    }
    let buffer = buffered.then(|| {
        tasks.iter().fold(0.0_f64, |m, x| m.max(x.1)) * [1.0, 1.2, 1.5][rng.pick(3)]
    });
    Some(scenario(&tasks, (b1, b2), buffer))
}

#[test]
fn enumeration_matches_probe_on_random_scenarios() {
    let mut rng = Lcg(42);
    let mut done = 0;
    while done < 60 {
        let Some(s) = random_scenario(&mut rng, false) else {
            continue;
        };
        if search_bounds(&s).is_err() {
            continue;
        }
        assert_enumeration_matches_probe(&s, "infinite");
        done += 1;
    }
}

#[test]
fn buffered_enumeration_matches_probe_on_random_scenarios() {
    let mut rng = Lcg(1337);
    let mut done = 0;
    while done < 60 {
        let Some(s) = random_scenario(&mut rng, true) else {
            continue;
        };
        let Ok(bounds) = search_bounds(&s) else {
            continue;
        };
        if bounds.lower >= bounds.upper {
            continue;
        }
        assert_enumeration_matches_probe(&s, "buffered");
        done += 1;
    }
}

#[test]
fn generous_buffer_criticals_match_the_infinite_enumeration() {
    // With the ceiling never binding, the four-side walk must reproduce the
    // three-sweep enumeration height for height.
    let mut rng = Lcg(77);
    let mut done = 0;
    while done < 40 {
        let Some(s) = random_scenario(&mut rng, false) else {
            continue;
        };
        let Ok(bounds) = search_bounds(&s) else {
            continue;
        };
        if bounds.upper - bounds.lower <= 1e-6 * s.total_data() {
            continue;
        }
        let infinite: Vec<f64> = critical_heights(&s, &bounds)
            .iter()
            .map(|c| c.height)
            .collect();
        let buffered_scenario = Scenario::new(
            s.tasks().to_vec(),
            s.busy(),
            *s.params(),
            Some(10.0 * s.total_data()),
        )
        .unwrap();
        let b_bounds = search_bounds(&buffered_scenario).unwrap();
        assert!((b_bounds.upper - bounds.upper).abs() <= 1e-9 * s.total_data());
        let buffered: Vec<f64> = critical_heights_buffered(&buffered_scenario, &b_bounds)
            .unwrap()
            .iter()
            .map(|c| c.height)
            .collect();
        assert_eq!(
            infinite.len(),
            buffered.len(),
            "{infinite:?} vs {buffered:?} on tasks {:?} busy {:?} bounds {bounds:?}",
            s.tasks(),
            s.busy()
        );
        for (a, b) in infinite.iter().zip(&buffered) {
            assert!((a - b).abs() <= 1e-6 * s.total_data(), "{infinite:?} vs {buffered:?}");
        }
        done += 1;
    }
}

#[test]
fn five_task_buffered_ceiling_release_is_a_real_event() {
    let s = scenario(
        &[
            (10.0, 500.0),
            (20.0, 500.0),
            (80.0, 500.0),
            (90.0, 700.0),
            (200.0, 300.0),
        ],
        (55.0, 85.0),
        Some(1000.0),
    );
    let bounds = search_bounds(&s).unwrap();
    let crits = critical_heights_buffered(&s, &bounds).unwrap();
    // The buffer contact at (80, 2000) releases when the last pre-busy
    // transmission segment aligns with the 1000/60 slope into it.
    assert_eq!(crits.len(), 1);
    let h_c = crits[0].height;
    assert!((h_c - (1000.0 + 1000.0 / 60.0 * 65.0)).abs() < 1e-6);
    assert!((crits[0].anchor.t - 80.0).abs() < 1e-9);
    assert!((crits[0].anchor.v - 2000.0).abs() < 1e-6);
    // The schedule structure genuinely differs across the critical height.
    let delta = 1e-6 * s.total_data();
    assert_ne!(fingerprint(&s, h_c - delta), fingerprint(&s, h_c + delta));
    assert_enumeration_matches_probe(&s, "five-task buffered");
}

#[test]
fn seven_task_anchor_pattern() {
    // Constructed so the max/min-slope chains anchor at tasks 1, 6, 3, 5 in
    // decreasing height order while tasks 2, 4 and 7 are shadowed: the
    // chord past each of them is steeper (forward) or shallower (backward)
    // than the chord onto them.
    let s = scenario(
        &[
            (10.0, 1600.0),
            (20.0, 300.0),
            (30.0, 2400.0),
            (50.0, 50.0),
            (70.0, 2000.0),
            (90.0, 1600.0),
            (200.0, 7000.0),
        ],
        (33.0, 48.0),
        None,
    );
    let bounds = search_bounds(&s).unwrap();
    assert!((bounds.lower - 4546.0).abs() < 1e-6, "{bounds:?}");
    assert!((bounds.upper - 5427.6470588).abs() < 1e-6, "{bounds:?}");
    let crits = critical_heights(&s, &bounds);
    let anchors: Vec<f64> = crits.iter().map(|c| c.anchor.t).collect();
    assert_eq!(anchors, vec![10.0, 90.0, 30.0, 70.0], "{crits:?}");
    let heights: Vec<f64> = crits.iter().map(|c| c.height).collect();
    let expected = [
        5280.0,                        // task 1 chain slope extended to the busy start
        7950.0 - 7000.0 / 110.0 * 42.0, // task 6 backward chord from the horizon
        4705.0,                        // task 3 extended to the busy start
        6350.0 - 80.0 * 22.0,          // task 5 backward chord from task 6
    ];
    for (got, want) in heights.iter().zip(expected) {
        assert!((got - want).abs() < 1e-6, "{heights:?}");
    }
    assert_eq!(crits[0].side, CriticalSide::PreBusySensing);
    assert_eq!(crits[1].side, CriticalSide::PostBusy);
    // Tasks 2, 4 and 7 never anchor a critical point.
    for never in [20.0, 50.0, 200.0] {
        assert!(anchors.iter().all(|&a| (a - never).abs() > 1e-9));
    }
    // Every listed height is a real structure change.
    assert_enumeration_matches_probe(&s, "seven-task");
}
