use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{FeedbackState, KnowledgeBase, OperatingPoint, TuneError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
}

/// `metric <= threshold` or `metric >= threshold`; priority 1 is the most
/// important.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub metric: String,
    pub relation: Relation,
    pub threshold: f64,
    pub priority: u32,
}

impl Constraint {
    pub fn holds(&self, value: f64) -> bool {
        match self.relation {
            Relation::Le => value <= self.threshold,
            Relation::Ge => value >= self.threshold,
        }
    }

    /// Distance to the feasible side (0 when satisfied).
    pub fn violation(&self, value: f64) -> f64 {
        match self.relation {
            Relation::Le => (value - self.threshold).max(0.0),
            Relation::Ge => (self.threshold - value).max(0.0),
        }
    }
}

fn number(s: &str, what: &str) -> Result<f64, TuneError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| TuneError::InvalidProblem(format!("{what} `{s}` is not a finite number")))
}

/// `metric<=value:priority` or `metric>=value:priority`.
impl FromStr for Constraint {
    type Err = TuneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TuneError::InvalidProblem(format!("constraint `{s}` is not `metric<=value:priority`"));
        let (body, prio) = s.rsplit_once(':').ok_or_else(bad)?;
        let priority: u32 = prio.trim().parse().map_err(|_| bad())?;
        if priority == 0 {
            return Err(TuneError::InvalidProblem("priorities start at 1".into()));
        }
        let (metric, relation, value) = if let Some((m, v)) = body.split_once("<=") {
            (m, Relation::Le, v)
        } else if let Some((m, v)) = body.split_once(">=") {
            (m, Relation::Ge, v)
        } else {
            return Err(bad());
        };
        let metric = metric.trim();
        if metric.is_empty() {
            return Err(bad());
        }
        Ok(Constraint { metric: metric.to_string(), relation, threshold: number(value, "threshold")?, priority })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        };
        write!(f, "{}{op}{}:{}", self.metric, self.threshold, self.priority)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Weighted sum of metric means to maximize or minimize.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rank {
    pub direction: Direction,
    pub terms: Vec<(String, f64)>,
}

/// `max:metric[*weight][+metric[*weight]...]`, or `min:...`.
impl FromStr for Rank {
    type Err = TuneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| TuneError::InvalidProblem(format!("rank `{s}`: {why}"));
        let (dir, body) = s.split_once(':').ok_or_else(|| bad("expected `max:` or `min:`"))?;
        let direction = match dir.trim() {
            "max" => Direction::Maximize,
            "min" => Direction::Minimize,
            _ => return Err(bad("expected `max:` or `min:`")),
        };
        let mut terms = Vec::new();
        for t in body.split('+') {
            let (m, w) = match t.split_once('*') {
                Some((m, w)) => (m.trim(), number(w, "weight")?),
                None => (t.trim(), 1.0),
            };
            if m.is_empty() {
                return Err(bad("empty metric name"));
            }
            terms.push((m.to_string(), w));
        }
        Ok(Rank { direction, terms })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    /// Sorted by priority, most important first.
    pub constraints: Vec<Constraint>,
    pub rank: Rank,
}

impl Problem {
    pub fn new(mut constraints: Vec<Constraint>, rank: Rank) -> Result<Self, TuneError> {
        if rank.terms.is_empty() {
            return Err(TuneError::InvalidProblem("rank needs at least one term".into()));
        }
        constraints.sort_by_key(|c| c.priority);
        if constraints.windows(2).any(|w| w[0].priority == w[1].priority) {
            return Err(TuneError::InvalidProblem("constraint priorities must be unique".into()));
        }
        Ok(Problem { constraints, rank })
    }

    fn check(&self, kb: &KnowledgeBase) -> Result<(), TuneError> {
        let names = self.constraints.iter().map(|c| &c.metric).chain(self.rank.terms.iter().map(|t| &t.0));
        for m in names {
            if !kb.metrics.contains(m) {
                return Err(TuneError::UnknownMetric(m.clone()));
            }
        }
        Ok(())
    }
}

/// Outcome of [`select_best`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Index into the knowledge base's points.
    pub point: usize,
    /// Priorities of the constraints dropped to find a feasible point.
    pub dropped: Vec<u32>,
    /// False when even the most important constraint alone could not be
    /// met and the point closest to it was returned.
    pub feasible: bool,
    pub rank_value: f64,
}

fn scaled(p: &OperatingPoint, metric: &str, fb: Option<&FeedbackState>) -> f64 {
    p.mean(metric) * fb.map_or(1.0, |f| f.scale(metric))
}

/// Picks the rank-optimal point among those meeting every constraint
/// (metric means scaled by feedback). Ties go to the smallest knob
/// configuration. When nothing is feasible, constraints are dropped from
/// the least important up; when even the most important one alone cannot
/// be met, the point violating it least wins (then rank, then knobs).
pub fn select_best(kb: &KnowledgeBase, problem: &Problem, feedback: Option<&FeedbackState>) -> Result<Selection, TuneError> {
    if kb.points.is_empty() {
        return Err(TuneError::EmptyKnowledge);
    }
    problem.check(kb)?;
    let rank_value = |p: &OperatingPoint| -> f64 {
        problem.rank.terms.iter().map(|(m, w)| w * scaled(p, m, feedback)).sum()
    };
    let values: Vec<f64> = kb.points.iter().map(rank_value).collect();
    // better-first ordering on (rank, knobs)
    let better = |a: usize, b: usize| -> Ordering {
        let r = values[a].total_cmp(&values[b]);
        let r = match problem.rank.direction {
            Direction::Maximize => r.reverse(),
            Direction::Minimize => r,
        };
        r.then_with(|| kb.points[a].knobs.cmp(&kb.points[b].knobs))
    };
    let mut active = problem.constraints.len();
    loop {
        let feasible = (0..kb.points.len()).filter(|&i| {
            problem.constraints[..active].iter().all(|c| c.holds(scaled(&kb.points[i], &c.metric, feedback)))
        });
        if let Some(best) = feasible.min_by(|&a, &b| better(a, b)) {
            return Ok(Selection {
                point: best,
                dropped: problem.constraints[active..].iter().rev().map(|c| c.priority).collect(),
                feasible: true,
                rank_value: values[best],
            });
        }
        if active == 1 {
            break;
        }
        active -= 1;
    }
    let first = &problem.constraints[0];
    let viol = |i: usize| first.violation(scaled(&kb.points[i], &first.metric, feedback));
    let best = (0..kb.points.len())
        .min_by(|&a, &b| viol(a).total_cmp(&viol(b)).then_with(|| better(a, b)))
        .expect("non-empty");
    Ok(Selection {
        point: best,
        dropped: problem.constraints[1..].iter().rev().map(|c| c.priority).collect(),
        feasible: false,
        rank_value: values[best],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autotune::parse_knowledge;

    fn kb3() -> KnowledgeBase {
        parse_knowledge("knob:k,metric:thr:mean,metric:err:mean\n1,10,0.05\n2,8,0.02\n3,12,0.07\n").unwrap()
    }

    fn problem(cs: &[&str], rank: &str) -> Problem {
        Problem::new(cs.iter().map(|c| c.parse().unwrap()).collect(), rank.parse().unwrap()).unwrap()
    }

    #[test]
    fn worked_example() {
        let kb = kb3();
        let s = select_best(&kb, &problem(&["err<=0.03:1"], "max:thr"), None).unwrap();
        assert_eq!(s.point, 1);
        assert!(s.feasible && s.dropped.is_empty());
        let s = select_best(&kb, &problem(&[], "max:thr"), None).unwrap();
        assert_eq!(s.point, 2);
    }

    #[test]
    fn relaxation_order() {
        let kb = kb3();
        // both infeasible together; dropping thr>=11 (priority 2) leaves err<=0.03
        let s = select_best(&kb, &problem(&["err<=0.03:1", "thr>=11:2"], "max:thr"), None).unwrap();
        assert_eq!((s.point, s.dropped.clone(), s.feasible), (1, vec![2], true));
        // nothing meets err<=0.001: closest on err wins
        let s = select_best(&kb, &problem(&["thr>=11:2", "err<=0.001:1"], "max:thr"), None).unwrap();
        assert_eq!((s.point, s.feasible), (1, false));
    }

    #[test]
    fn ties_break_on_knobs() {
        let kb = parse_knowledge("knob:a,knob:b,metric:t:mean\n2,1,5\n1,9,5\n1,3,5\n").unwrap();
        let s = select_best(&kb, &problem(&[], "min:t"), None).unwrap();
        assert_eq!(kb.points[s.point].knob_string(), "{a=1, b=3}");
    }

    #[test]
    fn problem_validation() {
        assert!(Problem::new(vec!["a<=1:1".parse().unwrap(), "b>=2:1".parse().unwrap()], "max:a".parse().unwrap()).is_err());
        assert!("a<1:1".parse::<Constraint>().is_err());
        assert!("a<=1".parse::<Constraint>().is_err());
        assert!("a<=x:1".parse::<Constraint>().is_err());
        assert!("avg:t".parse::<Rank>().is_err());
        let r: Rank = "min:time*2+energy*0.5".parse().unwrap();
        assert_eq!(r.terms, [("time".to_string(), 2.0), ("energy".to_string(), 0.5)]);
        let e = select_best(&kb3(), &problem(&["lat<=1:1"], "max:thr"), None).unwrap_err();
        assert_eq!(e, TuneError::UnknownMetric("lat".into()));
    }
}
