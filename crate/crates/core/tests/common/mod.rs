//! Kuhn poker Tables 1-4 transcribed verbatim (LaTeX tabular bodies) and
//! a small parser, shared by the table and acceptance tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use seqmodel::Rational;

pub const TABLE_E: &str = r#"
$\emptyset$ &$B_K$ &$Ch_K$ &$Ch_KCa_K$ &$Ch_KF_K$ &$B_Q$ &$Ch_Q$ &$Ch_QCa_Q$ &$Ch_QF_Q$ &$B_J$ &$Ch_J$ &$Ch_JCa_J$ &$Ch_JF_J$ \\ \hline
1 & & & & & & & & & & & & \\
-1 &1 &1 & & & & & & & & & & \\
& &-1 &1 &1 & & & & & & & & \\
-1 & & & & &1 &1 & & & & & & \\
& & & & & &-1 &1 &1 & & & & \\
-1 & & & & & & & & &1 &1 & & \\
& & & & & & & & & &-1 &1 &1 \\ \hline
"#;

pub const TABLE_F: &str = r#"
$\emptyset$ &$ca_Q$ &$f_Q$ &$b_Q$ &$ch_Q$ &$ca_J$ &$f_J$ &$b_J$ &$ch_J$ &$ca_K$ &$f_K$ &$b_K$ &$ch_K$ \\ \hline
1 & & & & & & & & & & & & \\
-1 &1 &1 & & & & & & & & & & \\
-1& & &1 &1 & & & & & & & & \\
-1& & & & &1 &1 & & & & & & \\
-1& & & & & & &1 &1 & & & & \\
-1& & & & & & & & &1 &1 & & \\
-1& & & & & & & & & & &1 &1 \\\hline
"#;

pub const TABLE_A: &str = r#"
 &$\emptyset$ &$ca_Q$ &$f_Q$ &$b_Q$ &$ch_Q$ &$ca_J$ &$f_J$ &$b_J$ &$ch_J$ &$ca_K$ &$f_K$ &$b_K$ &$ch_K$ \\ \hline
$\emptyset$ & & & & & & & & & & & & & \\ 
$B_K$ & &$\frac{1}{3}$ &$\frac{1}{6}$ & & &$\frac{1}{3}$ &$\frac{1}{6}$ & & & & & & \\ 
$Ch_K$ & & & & &$\frac{1}{6}$ & & & &$\frac{1}{6}$ & & & & \\ 
$Ch_KCa_K$ & & & &$\frac{1}{3}$ & & & &$\frac{1}{3}$ & & & & & \\ 
$Ch_KF_K$ & & & &$-\frac{1}{6}$ & & & &$-\frac{1}{6}$ & & & & & \\ 
$B_Q$ & & & & & &$\frac{1}{3}$ &$\frac{1}{6}$ & & &$-\frac{1}{3}$ &$\frac{1}{6}$ & & \\ 
$Ch_Q$ & & & & & & & & &$\frac{1}{6}$ & & & &$-\frac{1}{6}$ \\ 
$Ch_QCa_Q$ & & & & & & & &$\frac{1}{3}$ & & & &$-\frac{1}{3}$ & \\ 
$Ch_QF_Q$ & & & & & & & &$-\frac{1}{6}$ & & & &$-\frac{1}{6}$ & \\ 
$B_J$ & &$-\frac{1}{3}$ &$\frac{1}{6}$ & & & & & & &$-\frac{1}{3}$ &$\frac{1}{6}$ & & \\ 
$Ch_J$ & & & & &$-\frac{1}{6}$ & & & & & & & &$-\frac{1}{6}$ \\ 
$Ch_JCa_J$ & & & &$-\frac{1}{3}$ & & & & & & & &$-\frac{1}{3}$ & \\ 
$Ch_JF_J$ & & & &$-\frac{1}{6}$ & & & & & & & &$-\frac{1}{6}$ & \\ \hline
"#;

pub const TABLE_OBS: &str = r#"
Leaf node $\ell$ &$o_1(\ell)$ &$o_2(\ell)$ \\ \hline \hline
$B_Kca_Q$ & $\{B_Kca_Q\}$ &$\{B_Kca_Q\}$\\ \hline
$B_Kf_Q$ & $\{B_Kf_Q, B_Kf_J\}$ &$\{B_Kf_Q, B_Jf_Q\}$\\ \hline
$Ch_Kb_QCa_K$ &$\{Ch_Kb_QCa_K\}$ &$\{Ch_Kb_QCa_K\}$ \\ \hline
$Ch_Kb_QF_K$ &$\{Ch_Kb_QF_K, Ch_Kb_JF_K\}$ &$\{Ch_Kb_QF_K, Ch_Jb_QF_J\}$ \\ \hline
$Ch_Kch_Q$ &$\{Ch_Kch_Q\}$ &$\{Ch_Kch_Q\}$ \\ \hline
$B_Kca_J$ &$\{B_Kca_J\}$ &$\{B_Kca_J\}$ \\ \hline
$B_Kf_J$ &$\{B_Kf_J, B_Kf_Q\}$ &$\{B_Kf_J, B_Qf_J\}$ \\ \hline
$Ch_Kb_JCa_K$ &$\{Ch_Kb_JCa_K\}$ &$\{Ch_Kb_JCa_K\}$ \\ \hline
$Ch_Kb_JF_K$ &$\{Ch_Kb_JF_K, Ch_Kb_QF_K\}$ &$\{Ch_Kb_JF_K, Ch_Qb_JF_Q\}$ \\ \hline
$Ch_Kch_J$ &$\{Ch_Kch_J\}$ &$\{Ch_Kch_J\}$ \\ \hline
$B_Qca_K$ & $\{B_Qca_K\}$ &$\{B_Qca_K\}$\\ \hline
$B_Qf_K$ & $\{B_Qf_K, B_Qf_J\}$ &$\{B_Qf_K, B_Jf_K\}$\\ \hline
$Ch_Qb_KCa_Q$ &$\{Ch_Qb_KCa_Q\}$ &$\{Ch_Qb_KCa_Q\}$ \\ \hline
$Ch_Qb_KF_Q$ &$\{Ch_Qb_KF_Q, Ch_Qb_JF_Q\}$ &$\{Ch_Qb_KF_Q, Ch_Jb_KF_J\}$ \\ \hline
$Ch_Qch_K$ &$\{Ch_Qch_K\}$ &$\{Ch_Qch_K\}$ \\ \hline
$B_Qca_J$ &$\{B_Qca_J\}$ &$\{B_Qca_J\}$ \\ \hline
$B_Qf_J$ &$\{B_Qf_J, B_Qf_K\}$ &$\{B_Qf_J, B_Kf_J\}$ \\ \hline
$Ch_Qb_JCa_Q$ &$\{Ch_Qb_JCa_Q\}$ &$\{Ch_Qb_JCa_Q\}$ \\ \hline
$Ch_Qb_JF_Q$ &$\{Ch_Qb_JF_Q, Ch_Qb_KF_Q\}$ &$\{Ch_Qb_JF_Q, Ch_Kb_JF_K\}$ \\ \hline
$Ch_Qch_J$ &$\{Ch_Qch_J\}$ &$\{Ch_Qch_J\}$ \\ \hline
$B_Jca_K$ & $\{B_Jca_K\}$ &$\{B_Jca_K\}$\\ \hline
$B_Jf_K$ & $\{B_Jf_K, B_Jf_Q\}$ &$\{B_Jf_K, B_Qf_K\}$\\ \hline
$Ch_Jb_KCa_J$ &$\{Ch_Jb_KCa_J\}$ &$\{Ch_Jb_KCa_J\}$ \\ \hline
$Ch_Jb_KF_J$ &$\{Ch_Jb_KF_J, Ch_Jb_QF_J\}$ &$\{Ch_Jb_KF_J, Ch_Qb_KF_Q\}$ \\ \hline
$Ch_Jch_K$ &$\{Ch_Jch_K\}$ &$\{Ch_Jch_K\}$ \\ \hline
$B_Jca_Q$ &$\{B_Jca_Q\}$ &$\{B_Jca_Q\}$ \\ \hline
$B_Jf_Q$ &$\{B_Jf_Q, B_Jf_K\}$ &$\{B_Jf_Q, B_Kf_Q\}$ \\ \hline
$Ch_Jb_QCa_J$ &$\{Ch_Jb_QCa_J\}$ &$\{Ch_Jb_QCa_J\}$ \\ \hline
$Ch_Jb_QF_J$ &$\{Ch_Jb_QF_J, Ch_Jb_KF_J\}$ &$\{Ch_Jb_QF_J, Ch_Kb_QF_K\}$ \\ \hline
$Ch_Jch_Q$ &$\{Ch_Jch_Q\}$ &$\{Ch_Jch_Q\}$ \\ \hline
"#;

/// A transcribed matrix: column labels and, per row, an optional row label
/// with its entries.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<(Option<String>, Vec<Rational>)>,
}

/// Strips math-mode markup and whitespace from a sequence or leaf label.
pub fn normalize(label: &str) -> String {
    label.replace("\\emptyset", "∅").chars().filter(|c| !c.is_whitespace() && *c != '$').collect()
}

fn lines(src: &str) -> Vec<Vec<String>> {
    src.replace("\\hline", "")
        .split("\\\\")
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split('&').map(|c| c.trim().to_string()).collect())
        .collect()
}

fn entry(cell: &str) -> Rational {
    let cell: String = cell.chars().filter(|c| !c.is_whitespace() && *c != '$').collect();
    if cell.is_empty() {
        return Rational::from_integer(0);
    }
    let (sign, rest) = match cell.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, cell.as_str()),
    };
    let value = if let Some(frac) = rest.strip_prefix("\\frac{") {
        let (num, den) = frac.trim_end_matches('}').split_once("}{").expect("fraction");
        Rational::new(num.parse().unwrap(), den.parse().unwrap())
    } else {
        Rational::from_integer(rest.parse().unwrap())
    };
    value * Rational::from_integer(sign)
}

pub fn parse_table(src: &str, row_labels: bool) -> Table {
    let mut lines = lines(src).into_iter();
    let header = lines.next().expect("header row");
    let skip = usize::from(row_labels);
    let columns = header[skip..].iter().map(|c| normalize(c)).collect();
    let rows = lines
        .map(|cells| {
            let label = row_labels.then(|| normalize(&cells[0]));
            (label, cells[skip..].iter().map(|c| entry(c)).collect())
        })
        .collect();
    Table { columns, rows }
}

/// Rows of the observability table: leaf, `o_1`, `o_2`.
pub fn parse_observability(src: &str) -> Vec<(String, BTreeSet<String>, BTreeSet<String>)> {
    let set = |cell: &str| -> BTreeSet<String> {
        cell.replace("\\{", "").replace("\\}", "").split(',').map(normalize).collect()
    };
    lines(src)
        .into_iter()
        .skip(1)
        .map(|cells| (normalize(&cells[0]), set(&cells[1]), set(&cells[2])))
        .collect()
}

/// Every disagreement between the derived exact Kuhn game and the
/// transcribed tables; empty when they match entry for entry.
pub fn table_mismatches() -> Vec<String> {
    use seqmodel::game::kuhn;
    use seqmodel::{ExactSeqGame, Matrix, Player};

    let (tree, obs) = kuhn::<Rational>();
    let game = ExactSeqGame::derive(&tree).expect("Kuhn derives");
    let mut bad = Vec::new();
    let labels = |p: Player| -> Vec<String> { game.sequences_of(p).labels().iter().map(|l| normalize(l)).collect() };

    let mut compare = |name: &str, m: &Matrix<Rational>, rows: Option<Vec<String>>, cols: Vec<String>, t: Table| {
        if t.columns != cols {
            bad.push(format!("{name}: columns {:?} != {:?}", cols, t.columns));
        }
        if t.rows.len() != m.rows() {
            bad.push(format!("{name}: {} rows, table has {}", m.rows(), t.rows.len()));
        }
        for (i, (label, entries)) in t.rows.iter().enumerate().take(m.rows()) {
            if let (Some(rows), Some(label)) = (&rows, label) {
                if &rows[i] != label {
                    bad.push(format!("{name}: row {i} is {} in the table, {} derived", label, rows[i]));
                }
            }
            if entries.len() != m.cols() {
                bad.push(format!("{name}: row {i} has {} entries", entries.len()));
                continue;
            }
            for (j, want) in entries.iter().enumerate() {
                if m[(i, j)] != *want {
                    bad.push(format!("{name}[{i}][{}] = {}, table has {want}", cols[j], m[(i, j)]));
                }
            }
        }
    };
    compare("E", game.constraint(Player::One), None, labels(Player::One), parse_table(TABLE_E, false));
    compare("F", game.constraint(Player::Two), None, labels(Player::Two), parse_table(TABLE_F, false));
    compare(
        "A",
        game.payoff_matrix(Player::One),
        Some(labels(Player::One)),
        labels(Player::Two),
        parse_table(TABLE_A, true),
    );
    let b_is_minus_a = (0..13).all(|i| (0..13).all(|j| game.payoff_matrix(Player::Two)[(i, j)] == -game.payoff_matrix(Player::One)[(i, j)]));
    if !b_is_minus_a {
        bad.push("B != -A".to_string());
    }
    for p in Player::BOTH {
        let rhs = game.constraint_rhs(p);
        if rhs[0] != Rational::from_integer(1) || rhs[1..].iter().any(|v| *v != Rational::from_integer(0)) {
            bad.push(format!("right-hand side of {p} is not (1, 0, ..., 0)"));
        }
    }

    let rows = parse_observability(TABLE_OBS);
    if rows.len() != tree.leaves().len() {
        bad.push(format!("{} leaves, observability table has {} rows", tree.leaves().len(), rows.len()));
    }
    for (i, (leaf, o1, o2)) in rows.iter().enumerate() {
        let derived_label = tree.leaves().get(i).map(|l| normalize(&l.label));
        if derived_label.as_deref() != Some(leaf.as_str()) {
            bad.push(format!("leaf {i} is {leaf} in the table, {derived_label:?} derived"));
        }
        for (p, want) in [(Player::One, o1), (Player::Two, o2)] {
            match obs.observe_label(&tree, p, leaf) {
                Ok(got) => {
                    let got: BTreeSet<String> = got.iter().map(|l| normalize(l)).collect();
                    if &got != want {
                        bad.push(format!("o for {p} at {leaf}: {got:?} != {want:?}"));
                    }
                }
                Err(e) => bad.push(format!("{leaf}: {e}")),
            }
        }
    }
    bad
}

pub mod oracle {
    //! Independent reference computations.

    use rand::Rng;
    use seqmodel::bayes::{neg_log_posterior, DirichletPrior, LikelihoodTerm, ObservationLog};
    use seqmodel::sequence_form::Sequences;
    use seqmodel::fmap::{Fmap, PgdConfig, Termination};
    use seqmodel::game::{kuhn, rps, Node};
    use seqmodel::{Behavior, Game, Observability, Player, SeqGame};

    #[derive(Debug, Clone, Copy)]
    pub struct FullyObserved {
        pub error: f64,
        pub termination: Termination,
        pub estimate_objective: f64,
        pub mode_objective: f64,
    }

    fn mode_behavior(seqs: &Sequences, want: &[f64]) -> Behavior {
        Behavior::new((0..seqs.infoset_count()).map(|i| seqs.actions(i).map(|s| want[s]).collect()).collect())
    }

    /// Observations of `hands` uniformly random leaves.
    pub fn random_log<R: Rng>(leaves: usize, game: &SeqGame, obs: &Observability, hands: usize, rng: &mut R) -> ObservationLog<f64> {
        let mut log = ObservationLog::new();
        for _ in 0..hands {
            log.append_observation(game, obs, Player::Two, rng.gen_range(0..leaves)).unwrap();
        }
        log
    }

    pub fn kuhn_game() -> (Game, Observability, SeqGame) {
        let (tree, obs) = kuhn::<f64>();
        let g = SeqGame::derive(&tree).unwrap();
        (tree, obs, g)
    }

    pub fn rps_game() -> (Game, Observability, SeqGame) {
        let (tree, obs) = rps::<f64>();
        let g = SeqGame::derive(&tree).unwrap();
        (tree, obs, g)
    }

    /// Random behavioral strategy with every probability at least
    /// `min / actions`.
    pub fn random_behavior<R: Rng>(game: &SeqGame, player: Player, min: f64, rng: &mut R) -> Behavior {
        let seqs = game.sequences_of(player);
        let probs = (0..seqs.infoset_count())
            .map(|i| {
                let n = seqs.actions(i).len();
                let raw: Vec<f64> = (0..n).map(|_| min / n as f64 + rng.gen::<f64>()).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|v| v / total).collect()
            })
            .collect();
        Behavior::new(probs)
    }

    /// Expected payoffs by walking the tree and multiplying action and
    /// chance probabilities along every path.
    pub fn tree_value(tree: &Game, strategies: [&Behavior; 2]) -> [f64; 2] {
        fn walk(tree: &Game, id: usize, reach: f64, s: [&Behavior; 2], acc: &mut [f64; 2]) {
            match tree.node(id) {
                Node::Chance { outcomes, .. } => {
                    for o in outcomes {
                        walk(tree, o.child, reach * o.prob, s, acc);
                    }
                }
                Node::Decision { player, infoset, children } => {
                    for (a, &c) in children.iter().enumerate() {
                        walk(tree, c, reach * s[player.index()].at(*infoset)[a], s, acc);
                    }
                }
                Node::Terminal { leaf } => {
                    let l = &tree.leaves()[*leaf];
                    acc[0] += reach * l.payoffs[0];
                    acc[1] += reach * l.payoffs[1];
                }
            }
        }
        let mut acc = [0.0; 2];
        walk(tree, tree.root(), 1.0, strategies, &mut acc);
        acc
    }

    /// Fully observed play: random action counts at each information set of
    /// player 2, entered as singleton terms. Compares the FMAP estimate with
    /// the per-information-set Dirichlet mode `(n_a + α - 1) / (N + |A| (α - 1))`,
    /// by largest deviation and by objective value.
    pub fn fully_observed_error<R: Rng>(game: &SeqGame, rng: &mut R) -> FullyObserved {
        let seqs = game.sequences_of(Player::Two);
        let alpha = 1.0 + 3.0 * rng.gen::<f64>();
        let prior = DirichletPrior::symmetric(game, Player::Two, alpha).unwrap();
        let mut log = ObservationLog::new();
        let mut want = vec![1.0; seqs.len()];
        for i in 0..seqs.infoset_count() {
            let actions: Vec<usize> = seqs.actions(i).collect();
            let counts: Vec<u64> = actions
                .iter()
                .map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(0..400) })
                .collect();
            let total = counts.iter().sum::<u64>() as f64 + actions.len() as f64 * (alpha - 1.0);
            for (&s, &c) in actions.iter().zip(&counts) {
                log.add(LikelihoodTerm::singleton(s), c);
                want[s] = if total > 0.0 { (c as f64 + alpha - 1.0) / total } else { 1.0 / actions.len() as f64 };
            }
        }
        let solver = Fmap::new(game, prior, PgdConfig::default()).unwrap();
        let result = solver.estimate(&log, None).unwrap();
        let est = &result.estimate;
        // realization weights of depth-1 information sets equal the
        // behavioral probabilities
        let behavior = game.realization_to_behavioral(Player::Two, est).unwrap();
        let mut worst = 0.0f64;
        for i in 0..seqs.infoset_count() {
            for (a, s) in seqs.actions(i).enumerate() {
                worst = worst.max((behavior.at(i)[a] - want[s]).abs());
            }
        }
        let mode = game.behavioral_to_realization(Player::Two, &mode_behavior(seqs, &want)).unwrap();
        // the floor may lift a zero mode; compare objectives on the floored mode
        let floored: Vec<f64> = mode.as_slice().iter().map(|v| v.max(1e-6)).collect();
        FullyObserved {
            error: worst,
            termination: result.termination,
            estimate_objective: result.objective,
            mode_objective: neg_log_posterior(&floored, solver.prior(), &log).unwrap(),
        }
    }
}
