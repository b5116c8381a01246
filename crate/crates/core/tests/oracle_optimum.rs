use gamebench::agents::StrategyParams;
use gamebench::config::{AuctionParams, BarParams, PublicGoodsParams};
use gamebench::orchestrator::{run_match, RunOptions};
use gamebench::{Action, AgentSpec, GameKind, GameParams, MatchConfig, Rational};

fn oracle_score(config: &MatchConfig) -> Rational {
    let run = run_match(config, &RunOptions::default()).unwrap();
    run.score.unwrap().score
}

fn all_oracle(kind: GameKind) -> MatchConfig {
    MatchConfig::uniform(kind, 10, AgentSpec::oracle())
}

const HUNDRED: i64 = 100;

#[test]
fn oracles_score_100_on_vanilla_games() {
    for kind in [
        GameKind::GuessAverage,
        GameKind::DivideDollar,
        GameKind::PublicGoods,
        GameKind::DinersDilemma,
        GameKind::BattleRoyale,
        GameKind::PirateGame,
    ] {
        assert_eq!(oracle_score(&all_oracle(kind)), Rational::from(HUNDRED), "{kind}");
    }
}

#[test]
fn oracles_score_100_across_seeds() {
    for seed in 1..6 {
        for kind in [GameKind::BattleRoyale, GameKind::DivideDollar] {
            assert_eq!(oracle_score(&all_oracle(kind).with_seed(seed)), Rational::from(HUNDRED), "{kind} seed {seed}");
        }
    }
}

#[test]
fn guess_oracle_above_one_and_at_one() {
    for (ratio, rounds) in [(Rational::new(4, 3), 20), (Rational::ONE, 20), (Rational::ONE, 7)] {
        let mut cfg = all_oracle(GameKind::GuessAverage).with_rounds(rounds);
        cfg.params.set("ratio", serde_json::json!(ratio.to_string())).unwrap();
        assert_eq!(oracle_score(&cfg), Rational::from(HUNDRED), "R = {ratio}, K = {rounds}");
    }
}

#[test]
fn rotation_bar_scores_100() {
    let cfg = MatchConfig::uniform(GameKind::ElFarolBar, 10, AgentSpec::fixed("rotation_bar", StrategyParams::new()));
    assert_eq!(oracle_score(&cfg), Rational::from(HUNDRED));
}

#[test]
fn mixed_bar_oracle_is_close_but_not_exact() {
    let cfg = all_oracle(GameKind::ElFarolBar).with_params(GameParams::Bar(BarParams::default()));
    let s = oracle_score(&cfg).to_f64();
    assert!(s > 50.0 && s <= 100.0, "score {s}");
}

#[test]
fn zero_bid_first_price_scores_100() {
    let cfg = MatchConfig::uniform(GameKind::SealedBidAuction, 10, AgentSpec::fixed("zero_bidder", StrategyParams::new()));
    assert_eq!(oracle_score(&cfg), Rational::from(HUNDRED));
}

#[test]
fn shaded_oracle_bids_keep_the_equilibrium_fraction() {
    // Shading 9/10 leaves roughly a tenth of each valuation on the table.
    let s = oracle_score(&all_oracle(GameKind::SealedBidAuction)).to_f64();
    assert!((9.0..=13.0).contains(&s), "score {s}");
}

#[test]
fn second_price_is_not_scored() {
    let mut cfg = all_oracle(GameKind::SealedBidAuction);
    cfg.params = GameParams::Auction(AuctionParams { pricing: gamebench::config::Pricing::SecondPrice, ..Default::default() });
    let run = run_match(&cfg, &RunOptions::default()).unwrap();
    assert!(matches!(run.score, Err(gamebench::scoring::ScoreError::NotScored(_))));
}

#[test]
fn public_goods_above_group_size_contributes_everything() {
    let mut cfg = all_oracle(GameKind::PublicGoods).with_rounds(3);
    cfg.params = GameParams::PublicGoods(PublicGoodsParams { multiplier: Rational::from(12i64), ..Default::default() });
    assert_eq!(oracle_score(&cfg), Rational::from(HUNDRED));
}

#[test]
fn pirate_oracles_across_the_gold_grid() {
    for gold in [4u64, 5, 100, 400] {
        let mut cfg = all_oracle(GameKind::PirateGame);
        cfg.params.set("gold", serde_json::json!(gold)).unwrap();
        let run = run_match(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(run.score.unwrap().score, Rational::from(HUNDRED), "G = {gold}");
        assert_eq!(run.log.rounds.len(), 2, "first plan passes");
    }
}

#[test]
fn constant_bid_91_every_round() {
    let mut roster = vec![AgentSpec::oracle(); 9];
    roster.push(AgentSpec::fixed("constant_bid", [("value".to_string(), serde_json::json!(91))].into()));
    let cfg = MatchConfig::vanilla(GameKind::DivideDollar, roster);
    let run = run_match(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(run.log.rounds.len(), 20);
    for r in &run.log.rounds {
        assert_eq!(r.actions[&9], Action::Bid(91));
    }
}

#[test]
fn free_rider_contributes_nothing() {
    let cfg = MatchConfig::uniform(GameKind::PublicGoods, 10, AgentSpec::fixed("free_rider", StrategyParams::new()));
    let run = run_match(&cfg, &RunOptions::default()).unwrap();
    assert!(run.log.rounds.iter().all(|r| r.actions.values().all(|a| *a == Action::Contribution(0))));
}

#[test]
fn guess_oracle_chooses_min() {
    let run = run_match(&all_oracle(GameKind::GuessAverage), &RunOptions::default()).unwrap();
    assert!(run.log.rounds.iter().all(|r| r.actions.values().all(|a| *a == Action::ChosenNumber(0))));
}
