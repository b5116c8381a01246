use std::collections::BTreeMap;

use proptest::prelude::*;

use gamebench::action::{Action, BarChoice, DishChoice};
use gamebench::agents::{pirate_backward_induction, pirate_optimal_proposal, random_action};
use gamebench::config::{AuctionParams, BarParams, DinerParams, DollarParams, GuessParams, PublicGoodsParams};
use gamebench::games::{resolve_auction, resolve_bar, resolve_diner, resolve_dollar, resolve_guess, resolve_public_goods, RoundOutcome};
use gamebench::llm::parse_action;
use gamebench::orchestrator::{replay, run_match, RunOptions, Session};
use gamebench::rng::rng_stream;
use gamebench::{AgentSpec, GameKind, MatchConfig, PromptVersion, Rational};

fn kind() -> impl Strategy<Value = GameKind> {
    prop::sample::select(GameKind::ALL.to_vec())
}

fn seat() -> impl Strategy<Value = AgentSpec> {
    prop_oneof![Just(AgentSpec::oracle()), Just(AgentSpec::random())]
}

fn mixed_config() -> impl Strategy<Value = MatchConfig> {
    (kind(), 2usize..=10, any::<u64>(), 1u32..=6).prop_flat_map(|(kind, n, seed, rounds)| {
        prop::collection::vec(seat(), n).prop_map(move |roster| {
            let mut cfg = MatchConfig::vanilla(kind, roster).with_seed(seed).with_rounds(rounds);
            cfg.params = kind.default_params(n);
            cfg
        })
    })
}

fn valid(cfg: &MatchConfig) -> bool {
    cfg.validate().is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn playouts_are_legal_and_replay_exactly(cfg in mixed_config()) {
        prop_assume!(valid(&cfg));
        let run = run_match(&cfg, &RunOptions::default()).unwrap();
        prop_assert!(run.log.invalid.is_none());
        prop_assert!(run.log.terminal.is_some());
        prop_assert_eq!(replay(&run.log).unwrap(), run.log.clone());
        let again = run_match(&cfg, &RunOptions::default()).unwrap();
        prop_assert_eq!(again.log.to_jsonl(), run.log.to_jsonl());
    }

    #[test]
    fn scores_stay_in_range(cfg in mixed_config()) {
        prop_assume!(valid(&cfg));
        let run = run_match(&cfg, &RunOptions::default()).unwrap();
        if let Ok(report) = run.score {
            prop_assert!(report.score >= Rational::ZERO && report.score <= Rational::from(100i64));
        }
    }

    #[test]
    fn eliminations_only_shrink_the_alive_set(seed in any::<u64>(), n in 2usize..=10) {
        let cfg = MatchConfig::uniform(GameKind::BattleRoyale, n, AgentSpec::random()).with_seed(seed);
        let run = run_match(&cfg, &RunOptions::default()).unwrap();
        let mut alive = n;
        for r in &run.log.rounds {
            let RoundOutcome::Shot { alive: now, .. } = &r.outcome else { panic!("royale logs shots") };
            prop_assert!(now.len() <= alive);
            prop_assert!(alive - now.len() <= 1);
            alive = now.len();
        }
    }

    #[test]
    fn rejected_plans_remove_exactly_the_proposer(seed in any::<u64>(), n in 2usize..=10) {
        let cfg = MatchConfig::uniform(GameKind::PirateGame, n, AgentSpec::random()).with_seed(seed);
        let run = run_match(&cfg, &RunOptions::default()).unwrap();
        let rejected = run.log.rounds.iter().filter(|r| matches!(r.outcome, RoundOutcome::PirateVote { accepted: false, .. })).count();
        let terminal = run.log.terminal.unwrap();
        prop_assert_eq!(terminal.survivors.len(), n - rejected);
        let total: Rational = terminal.totals.iter().copied().sum();
        prop_assert_eq!(total, Rational::from(100i64));
    }

    #[test]
    fn guess_is_permutation_invariant(choices in prop::collection::vec(0i64..=100, 2..12), rot in 0usize..12) {
        let params = GuessParams::default();
        let mut shuffled = choices.clone();
        let k = rot % choices.len();
        shuffled.rotate_left(k);
        let (RoundOutcome::Guess { target: t1, winning_numbers: w1, winners: p1, .. },
             RoundOutcome::Guess { target: t2, winning_numbers: w2, winners: p2, .. }) =
            (resolve_guess(&choices, &params), resolve_guess(&shuffled, &params)) else { panic!() };
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(w1, w2);
        let n = choices.len();
        let mut mapped: Vec<usize> = p2.iter().map(|p| (p + k) % n).collect();
        mapped.sort_unstable();
        prop_assert_eq!(p1, mapped);
    }

    #[test]
    fn bar_and_diner_depend_only_on_counts(go in prop::collection::vec(any::<bool>(), 2..12), rot in 0usize..12) {
        let decisions: Vec<BarChoice> = go.iter().map(|g| if *g { BarChoice::Go } else { BarChoice::Stay }).collect();
        let mut shuffled = decisions.clone();
        shuffled.rotate_left(rot % decisions.len());
        let a = resolve_bar(&decisions, &BarParams::default());
        let b = resolve_bar(&shuffled, &BarParams::default());
        let (RoundOutcome::Bar { goers: g1, crowded: c1, .. }, RoundOutcome::Bar { goers: g2, crowded: c2, .. }) = (a, b) else { panic!() };
        prop_assert_eq!((g1, c1), (g2, c2));

        let dishes: Vec<DishChoice> = go.iter().map(|g| if *g { DishChoice::Costly } else { DishChoice::Cheap }).collect();
        let mut shuffled: Vec<DishChoice> = dishes.clone();
        shuffled.rotate_left(rot % dishes.len());
        let (RoundOutcome::Diner { share: s1, .. }, RoundOutcome::Diner { share: s2, .. }) =
            (resolve_diner(&dishes, &DinerParams::default()), resolve_diner(&shuffled, &DinerParams::default())) else { panic!() };
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn dollar_pays_bids_or_nothing(bids in prop::collection::vec(0u64..=100, 2..12)) {
        let RoundOutcome::Dollar { total, exceeded, payouts } = resolve_dollar(&bids, &DollarParams::default()) else { panic!() };
        prop_assert_eq!(total, bids.iter().sum::<u64>());
        prop_assert_eq!(exceeded, total > 100);
        if exceeded {
            prop_assert!(payouts.iter().all(|p| *p == 0));
        } else {
            prop_assert_eq!(payouts, bids);
        }
    }

    #[test]
    fn public_goods_accounting(contrib in prop::collection::vec(0u64..=20, 2..12), mult in 0i64..30) {
        let params = PublicGoodsParams { multiplier: Rational::new(mult as i128, 10), ..Default::default() };
        let before = vec![Rational::from(20i64); contrib.len()];
        let RoundOutcome::PublicGoods { pot, gain, balances, .. } = resolve_public_goods(&contrib, &before, &params) else { panic!() };
        let n = Rational::from(contrib.len());
        let sum_before: Rational = before.iter().copied().sum();
        let sum_after: Rational = balances.iter().copied().sum();
        prop_assert_eq!(sum_after, sum_before - Rational::from(pot) + n * gain);
        prop_assert_eq!(n * gain, params.multiplier * Rational::from(pot));
    }

    #[test]
    fn auction_winner_pays_at_most_their_bid(bids in prop::collection::vec(0u64..=200, 2..12), second in any::<bool>()) {
        let valuations: Vec<u64> = bids.iter().map(|b| (b % 200) + 1).collect();
        let params = AuctionParams {
            pricing: if second { gamebench::config::Pricing::SecondPrice } else { gamebench::config::Pricing::FirstPrice },
            ..Default::default()
        };
        let RoundOutcome::Auction { winner, winning_bid, price, .. } = resolve_auction(&bids, &valuations, &params) else { panic!() };
        prop_assert_eq!(winning_bid, *bids.iter().max().unwrap());
        prop_assert_eq!(bids.iter().position(|b| *b == winning_bid), Some(winner));
        prop_assert!(price <= winning_bid);
    }

    #[test]
    fn backward_induction_matches_closed_form(n in 1usize..=14, gold in 0u64..=500) {
        prop_assume!(gold >= ((n - 1) / 2) as u64);
        let solved = pirate_backward_induction(n, gold);
        prop_assert_eq!(&solved[n - 1].proposal, &pirate_optimal_proposal(n, 1, gold));
        prop_assert!(solved[n - 1].proposer_survives);
    }

    #[test]
    fn echo_then_parse_is_identity(cfg in mixed_config(), draw in any::<u64>()) {
        prop_assume!(valid(&cfg));
        let game = gamebench::new_game(&cfg);
        let step = game.step().unwrap();
        for player in step.players {
            let request = game.request(player).unwrap();
            let mut rng = rng_stream(draw, "prop", 0, player as u64);
            let action = random_action(&request, &mut rng);
            let seats = match &request.constraint {
                gamebench::Constraint::Allocation { seats, .. } => seats.clone(),
                _ => Vec::new(),
            };
            let echo = action.echo(&seats, |p| format!("player_{}", p + 1));
            prop_assert_eq!(parse_action(&echo, &request, player), Ok(action));
        }
    }

    #[test]
    fn config_round_trips(cfg in mixed_config(), version in 0usize..5, temp in 0i128..=10) {
        let mut cfg = cfg;
        cfg.prompt_version = PromptVersion::ALL[version];
        cfg.temperature = Rational::new(temp, 10);
        let toml_text = cfg.to_toml_string().unwrap();
        prop_assert_eq!(MatchConfig::from_toml_str(&toml_text).unwrap(), cfg.clone());
        let json = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(MatchConfig::from_json_str(&json).unwrap(), cfg);
    }

    #[test]
    fn requests_ignore_other_submissions(seed in any::<u64>(), order in Just((0usize..10).collect::<Vec<_>>()).prop_shuffle(), k in prop::sample::select(vec![GameKind::GuessAverage, GameKind::ElFarolBar, GameKind::SealedBidAuction, GameKind::PublicGoods])) {
        let cfg = MatchConfig::uniform(k, 10, AgentSpec::human()).with_seed(seed).with_rounds(2);
        let mut session = Session::new("leak", cfg.clone(), &RunOptions::default()).unwrap();
        let baseline: BTreeMap<usize, String> = (0..10)
            .map(|p| (p, session.game().render_observation(p, PromptVersion::V1).to_text()))
            .collect();
        let mut rng = rng_stream(seed, "leak", 0, 0);
        for p in &order[..9] {
            let request = session.request(*p).unwrap();
            session.submit(*p, random_action(&request, &mut rng)).unwrap();
            let last = order[9];
            prop_assert_eq!(&session.game().render_observation(last, PromptVersion::V1).to_text(), &baseline[&last]);
            prop_assert_eq!(session.view(last).unwrap(), session.game().view(last).unwrap());
        }
    }
}

#[test]
fn backward_induction_grid_is_exhaustive() {
    for gold in [4u64, 5, 100, 400] {
        for n in 1..=10 {
            let solved = pirate_backward_induction(n, gold);
            assert_eq!(solved[n - 1].proposal, pirate_optimal_proposal(n, 1, gold), "n={n} G={gold}");
        }
    }
}

#[test]
fn random_agent_guess_is_uniform() {
    let request = gamebench::ActionRequest::new(
        gamebench::RequestKind::ChosenNumber,
        gamebench::Constraint::Range { min: 0, max: 100 },
    );
    let mut rng = rng_stream(5, "uniform", 0, 0);
    let draws: Vec<i64> = (0..100_000)
        .map(|_| match random_action(&request, &mut rng) {
            Action::ChosenNumber(c) => c,
            other => panic!("{other:?}"),
        })
        .collect();
    let mean = draws.iter().sum::<i64>() as f64 / draws.len() as f64;
    assert!((mean - 50.0).abs() < 0.5, "mean {mean}");
    assert!(draws.contains(&0) && draws.contains(&100));
}
