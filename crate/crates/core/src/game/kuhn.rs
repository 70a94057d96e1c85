use super::{GameTree, Observability, Player, TreeBuilder};
use crate::scalar::Scalar;

/// Cards from highest to lowest.
pub const KUHN_CARDS: [char; 3] = ['K', 'Q', 'J'];

// Deal order of the chance node: (player 1 card, player 2 card).
const DEALS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ending {
    BetCall,
    BetFold,
    CheckBetCall,
    CheckBetFold,
    CheckCheck,
}

impl Ending {
    fn is_fold(self) -> bool {
        matches!(self, Ending::BetFold | Ending::CheckBetFold)
    }
}

/// Kuhn poker with the canonical information-set and action order:
///
/// - player 1: for each card K, Q, J the opening set `[B, Ch]` followed by
///   the set facing a bet after checking `[Ca, F]`;
/// - player 2: for each card Q, J, K the set facing a bet `[ca, f]` followed
///   by the set facing a check `[b, ch]`.
///
/// Observability follows the online convention: a fold hides the opponent's
/// card, a showdown reveals both.
pub fn kuhn<S: Scalar>() -> (GameTree<S>, Observability) {
    let mut b = TreeBuilder::<S>::new();
    let mut p1_open = [0; 3];
    let mut p1_facing = [0; 3];
    for (c, card) in KUHN_CARDS.iter().enumerate() {
        p1_open[c] = b.infoset(Player::One, &format!("{card}"), &[&format!("B_{card}"), &format!("Ch_{card}")]);
        p1_facing[c] = b.infoset(
            Player::One,
            &format!("{card}:Ch-b"),
            &[&format!("Ca_{card}"), &format!("F_{card}")],
        );
    }
    let mut p2_bet = [0; 3];
    let mut p2_check = [0; 3];
    for c in [1, 2, 0] {
        let card = KUHN_CARDS[c];
        p2_bet[c] = b.infoset(Player::Two, &format!("{card}:B"), &[&format!("ca_{card}"), &format!("f_{card}")]);
        p2_check[c] = b.infoset(
            Player::Two,
            &format!("{card}:Ch"),
            &[&format!("b_{card}"), &format!("ch_{card}")],
        );
    }

    let one = S::one;
    let two = || S::one() + S::one();
    let mut endings = Vec::new();
    let mut outcomes = Vec::new();
    for &(c1, c2) in &DEALS {
        // lower index = higher card
        let win = if c1 < c2 { S::one() } else { -S::one() };
        let bet_call = b.zero_sum_terminal(two() * win.clone());
        let bet_fold = b.zero_sum_terminal(one());
        let p2_facing_bet = b.decision(Player::Two, p2_bet[c2], vec![bet_call, bet_fold]);
        let cb_call = b.zero_sum_terminal(two() * win.clone());
        let cb_fold = b.zero_sum_terminal(-one());
        let p1_facing_bet = b.decision(Player::One, p1_facing[c1], vec![cb_call, cb_fold]);
        let check_check = b.zero_sum_terminal(win);
        let p2_facing_check = b.decision(Player::Two, p2_check[c2], vec![p1_facing_bet, check_check]);
        let open = b.decision(Player::One, p1_open[c1], vec![p2_facing_bet, p2_facing_check]);
        outcomes.push((format!("{}{}", KUHN_CARDS[c1], KUHN_CARDS[c2]), S::from_ratio(1, 6), open));
        for e in [Ending::BetCall, Ending::BetFold, Ending::CheckBetCall, Ending::CheckBetFold, Ending::CheckCheck] {
            endings.push((c1, c2, e));
        }
    }
    let root = b.chance(outcomes);
    let tree = b.build(root).expect("Kuhn tree is well formed");
    debug_assert_eq!(tree.leaves().len(), endings.len());

    let observe = |own_card: fn(&(usize, usize, Ending)) -> usize| -> Vec<Vec<usize>> {
        endings
            .iter()
            .enumerate()
            .map(|(leaf, key)| {
                if !key.2.is_fold() {
                    return vec![leaf];
                }
                let mut set = vec![leaf];
                set.extend(
                    endings
                        .iter()
                        .enumerate()
                        .filter(|(other, k)| *other != leaf && k.2 == key.2 && own_card(k) == own_card(key))
                        .map(|(other, _)| other),
                );
                set
            })
            .collect()
    };
    let obs = Observability::new(observe(|k| k.0), observe(|k| k.1));
    (tree, obs)
}
