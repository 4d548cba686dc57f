//! Positional rules on a small election: the same profile tallied under
//! Borda, plurality, and a custom score vector, plus the invariances that
//! make normalized score vectors canonical.
//!
//! Run with: cargo run -p dpvote --example aggregate_ballots

use dpvote::ranking::{
    aggregate, aggregate_ballots, Histogram, Permutation, PositionalRule,
};

fn ballot(order: &[usize]) -> Permutation {
    Permutation::new(order.to_vec()).expect("valid ballot")
}

fn show(name: &str, rule: &PositionalRule, ballots: &[Permutation]) {
    let tally = aggregate_ballots(rule, ballots).expect("tally");
    let order: Vec<String> = tally.order.iter().map(|c| c.to_string()).collect();
    let totals: Vec<String> = tally
        .order
        .iter()
        .map(|&c| format!("{c}:{:.2}", tally.scores[c]))
        .collect();
    println!(
        "{:<16} {}   totals {}{}",
        name,
        order.join(" > "),
        totals.join("  "),
        if tally.tied { "   (exact tie, broken toward smaller id)" } else { "" },
    );
}

fn main() {
    // 9 voters, 3 candidates: candidate 0 is broadly liked, candidate 1
    // polarizes (often first, often last), candidate 2 is nobody's favorite
    let ballots: Vec<Permutation> = [
        [1, 0, 2], [1, 0, 2], [1, 2, 0],
        [0, 2, 1], [0, 2, 1], [0, 1, 2],
        [0, 1, 2], [2, 0, 1], [0, 2, 1],
    ]
    .iter()
    .map(|o| ballot(o))
    .collect();

    println!("profile: 9 ballots over candidates {{0, 1, 2}}\n");
    show("borda", &PositionalRule::borda(3).unwrap(), &ballots);
    show("plurality", &PositionalRule::plurality(3).unwrap(), &ballots);
    // top-heavy custom scores, in whatever units the pollster liked;
    // they normalize to (1, 0.25, 0) without changing any outcome
    let custom = PositionalRule::custom(&[8.0, 2.0, 0.0]).unwrap();
    show("custom (8,2,0)", &custom, &ballots);
    println!("custom scores normalize to {:?}\n", custom.scores());

    // the ballot list and its histogram tally identically
    let hist = Histogram::from_ballots(&ballots).unwrap();
    let via_list = aggregate_ballots(&PositionalRule::borda(3).unwrap(), &ballots).unwrap();
    let via_hist = aggregate(&PositionalRule::borda(3).unwrap(), hist.counts()).unwrap();
    println!("histogram counts (lexicographic ballot order): {:?}", hist.counts());
    println!(
        "ballot-list tally == histogram tally: {}",
        via_list.order == via_hist.order
    );

    // scale invariance: vote shares carry the same information as counts
    let shares = hist.normalize().unwrap();
    let via_shares = aggregate(&PositionalRule::borda(3).unwrap(), shares.weights()).unwrap();
    println!("count tally == share tally: {}", via_hist.order == via_shares.order);
}
