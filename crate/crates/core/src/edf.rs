//! Earliest-Deadline-First scheduling of unit jobs onto a fixed calibration
//! multiset, plus the windowed virtual feasibility check used by the long-job
//! controller.
//!
//! EDF is a complete feasibility test here: it finds a schedule whenever one
//! exists (checked exhaustively against an independent assignment enumeration
//! in the acceptance suite).

use std::collections::BTreeSet;

use crate::domain::{
    slot_capacity, Assignment, CalibParams, Calibration, Job, JobId, Schedule, TimeStep,
};

/// Booked calibrated slots, keyed by `(time, calibration index)`. Tracks what
/// earlier steps consumed so later feasibility checks never reuse a slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CapacityProfile {
    occupied: BTreeSet<(TimeStep, usize)>,
}

impl CapacityProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn occupied_at(&self, t: TimeStep) -> usize {
        self.occupied.range((t, 0)..(t, usize::MAX)).count()
    }

    pub fn is_free(&self, calibration: usize, t: TimeStep) -> bool {
        !self.occupied.contains(&(t, calibration))
    }

    /// Marks a slot consumed; returns false if it already was.
    pub fn book(&mut self, calibration: usize, t: TimeStep) -> bool {
        self.occupied.insert((t, calibration))
    }

    /// Free calibrated slots at `t`: capacity minus what is already booked.
    pub fn remaining(
        &self,
        calibrations: &[Calibration],
        t: TimeStep,
        params: CalibParams,
    ) -> usize {
        slot_capacity(calibrations, t, params).saturating_sub(self.occupied_at(t))
    }
}

/// Result of an EDF run: a full schedule, or the first job (in deadline
/// order) that misses its deadline and when the miss was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdfOutcome {
    Feasible(Schedule),
    Infeasible { job: JobId, at_time: TimeStep },
}

impl EdfOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, EdfOutcome::Feasible(_))
    }

    pub fn into_schedule(self) -> Option<Schedule> {
        match self {
            EdfOutcome::Feasible(s) => Some(s),
            EdfOutcome::Infeasible { .. } => None,
        }
    }
}

/// Earliest usable slot of any calibration strictly after `t`, if one exists.
fn next_slot_after(
    calibrations: &[Calibration],
    t: TimeStep,
    params: CalibParams,
) -> Option<TimeStep> {
    calibrations
        .iter()
        .filter_map(|c| {
            let cs = c.calibrated_start(params);
            let ce = c.calibrated_end(params);
            if cs > t + 1 {
                Some(cs)
            } else if t + 1 < ce {
                Some(t + 1)
            } else {
                None
            }
        })
        .min()
}

/// Free calibrations covering `t`, ordered by (calibrated end, index): the
/// slot that wastes the least future capacity is consumed first, ties by
/// list order.
fn free_calibrations_at(
    calibrations: &[Calibration],
    consumed: &CapacityProfile,
    t: TimeStep,
    params: CalibParams,
) -> Vec<usize> {
    let mut free: Vec<usize> = calibrations
        .iter()
        .enumerate()
        .filter(|(idx, c)| c.covers(t, params) && consumed.is_free(*idx, t))
        .map(|(idx, _)| idx)
        .collect();
    free.sort_by_key(|&idx| (calibrations[idx].calibrated_end(params), idx));
    free
}

/// Schedules `jobs` on `calibrations` by EDF: walk times ascending, insert
/// jobs as they release, and at each time fill every free calibrated slot
/// with the pending job of smallest (deadline, id).
///
/// Deterministic; iterates event times only (releases, slot boundaries,
/// queued deadlines), so sparse horizons cost proportional to events.
pub fn edf_schedule(jobs: &[Job], calibrations: &[Calibration], params: CalibParams) -> EdfOutcome {
    let mut schedule = Schedule {
        calibrations: calibrations.to_vec(),
        assignments: Vec::new(),
    };
    if jobs.is_empty() {
        return EdfOutcome::Feasible(schedule);
    }

    let mut by_release: Vec<&Job> = jobs.iter().collect();
    by_release.sort_by_key(|j| (j.release, j.deadline, j.id));
    let mut next_release = 0usize;
    let mut queue: BTreeSet<(TimeStep, JobId)> = BTreeSet::new();
    let mut consumed = CapacityProfile::new();
    let mut t = by_release[0].release;

    loop {
        while next_release < by_release.len() && by_release[next_release].release == t {
            let j = by_release[next_release];
            queue.insert((j.deadline, j.id));
            next_release += 1;
        }

        // A queued job whose deadline is already <= t can no longer finish.
        if let Some(&(d, id)) = queue.first() {
            if d <= t {
                return EdfOutcome::Infeasible {
                    job: id,
                    at_time: t,
                };
            }
        }

        for idx in free_calibrations_at(calibrations, &consumed, t, params) {
            let Some(&(_, id)) = queue.first() else { break };
            queue.pop_first();
            consumed.book(idx, t);
            schedule.assignments.push(Assignment {
                job: id,
                calibration: idx,
                time: t,
            });
        }

        let upcoming_release = by_release.get(next_release).map(|j| j.release);
        if queue.is_empty() {
            match upcoming_release {
                Some(r) => t = r,
                None => break,
            }
        } else {
            let mut next_t = queue.first().map(|&(d, _)| d).unwrap();
            if let Some(r) = upcoming_release {
                next_t = next_t.min(r);
            }
            if let Some(s) = next_slot_after(calibrations, t, params) {
                next_t = next_t.min(s);
            }
            t = next_t;
        }
    }

    EdfOutcome::Feasible(schedule)
}

pub fn edf_feasible(jobs: &[Job], calibrations: &[Calibration], params: CalibParams) -> bool {
    edf_schedule(jobs, calibrations, params).is_feasible()
}

/// Virtual feasibility check over the window `[t, t + lambda + T]`: EDF all
/// pending jobs into the free slots of that window and report the first job
/// with deadline `<= t + lambda + T + 1` that is left unassigned or assigned
/// at or past its deadline. Jobs due beyond the cutoff may be left over
/// without triggering a violation (they stay in the queue but, by EDF order,
/// never displace cutoff jobs).
///
/// Nothing is actually scheduled: `consumed` is read, never written.
pub fn virtual_check<'a, I>(
    pending: I,
    calibrations: &[Calibration],
    consumed: &CapacityProfile,
    t: TimeStep,
    params: CalibParams,
) -> Option<JobId>
where
    I: IntoIterator<Item = &'a Job>,
{
    let cutoff = t + params.total_len() + 1;
    let last_slot = t + params.total_len();
    let mut queue: BTreeSet<(TimeStep, JobId)> = BTreeSet::new();
    for job in pending {
        debug_assert!(job.release <= t, "virtual_check expects released jobs only");
        queue.insert((job.deadline, job.id));
    }

    let mut tau = t;
    while tau <= last_slot && !queue.is_empty() {
        let mut capacity = consumed.remaining(calibrations, tau, params);
        while capacity > 0 {
            let Some(&(d, id)) = queue.first() else { break };
            if d <= tau {
                // popped at or past its deadline; d <= tau <= last_slot < cutoff
                return Some(id);
            }
            queue.pop_first();
            capacity -= 1;
        }
        match next_slot_after(calibrations, tau, params) {
            Some(s) if s <= last_slot => tau = s,
            _ => break,
        }
    }

    queue.iter().find(|&&(d, _)| d <= cutoff).map(|&(_, id)| id)
}
