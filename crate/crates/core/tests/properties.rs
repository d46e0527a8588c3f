use bilinear_ac::adapt::{td_delta, AdaptState, Rule};
use bilinear_ac::envs::{self, reward, Observation, TaskDescriptor, Transition, OBS_DIM};
use bilinear_ac::models::{ema_layer, BilinearAgent, Checkpoint, GatingVector, ModelConfig};
use bilinear_ac::numerics::{dot, Activation, DenseLayer};
use bilinear_ac::sac::ReplayBuffer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn agent(seed: u64) -> BilinearAgent {
    BilinearAgent::init(ModelConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn obs() -> impl Strategy<Value = Observation> {
    prop::array::uniform10(-2.0f64..2.0).prop_map(Observation)
}

fn gvec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 8)
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn actor_mean_is_linear_in_g(seed in 0u64..4, s in obs(), g1 in gvec(), g2 in gvec(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let ag = agent(seed);
        let mix = GatingVector(g1.clone()).combine(a, &GatingVector(g2.clone()), b);
        let m = ag.basis_policies.mean(&mix.0, &s).unwrap();
        let m1 = ag.basis_policies.mean(&g1, &s).unwrap();
        let m2 = ag.basis_policies.mean(&g2, &s).unwrap();
        for d in 0..2 {
            let want = a * m1[d] + b * m2[d];
            prop_assert!(close(m[d], want, m1[d].abs() + m2[d].abs()));
        }
    }

    #[test]
    fn critic_is_linear_in_g(seed in 0u64..4, s in obs(), act in prop::array::uniform2(-1.0f64..1.0), g1 in gvec(), g2 in gvec(), a in -3.0f64..3.0) {
        let ag = agent(seed);
        let c = &ag.critics[1];
        let mix: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| a * x + y).collect();
        let q = c.value(&mix, &s, &act).unwrap();
        let q1 = c.value(&g1, &s, &act).unwrap();
        let q2 = c.value(&g2, &s, &act).unwrap();
        prop_assert!(close(q, a * q1 + q2, q1.abs() + q2.abs()));
        prop_assert!(close(q, dot(&mix, &c.responses(&s, &act)), q.abs()));
    }

    #[test]
    fn reward_is_rotation_invariant(dx in -1.0f64..1.0, dy in -1.0f64..1.0, theta in 0.0f64..6.3, phi in -6.3f64..6.3) {
        let (s, c) = phi.sin_cos();
        let rotated = [c * dx - s * dy, s * dx + c * dy];
        prop_assert!((reward(rotated, theta + phi) - reward([dx, dy], theta)).abs() < 1e-12);
    }

    #[test]
    fn speed_never_exceeds_limit(actions in prop::collection::vec(prop::array::uniform2(-10.0f64..10.0), 1..200), theta in 0.0f64..6.3) {
        let task = TaskDescriptor::new(theta);
        let (mut st, _) = envs::reset();
        for a in actions {
            let out = envs::step(&st, a, &task).unwrap();
            prop_assert!(out.state.velocity[0].hypot(out.state.velocity[1]) <= envs::V_MAX + 1e-12);
            prop_assert_eq!(out.observation.goal(), &task.g[..]);
            st = out.state;
        }
    }

    #[test]
    fn replay_keeps_newest_within_capacity(cap in 1usize..40, n in 0usize..120) {
        let mut b = ReplayBuffer::new(cap);
        for i in 0..n {
            b.push(Transition {
                s: Observation([0.0; OBS_DIM]),
                a: [0.0, 0.0],
                r: i as f64,
                s_next: Observation([0.0; OBS_DIM]),
                done: false,
                g: TaskDescriptor::new(0.0),
            });
            prop_assert!(b.len() <= cap);
        }
        let kept: Vec<f64> = b.iter_fifo().map(|t| t.r).collect();
        let want: Vec<f64> = (n.saturating_sub(cap)..n).map(|i| i as f64).collect();
        prop_assert_eq!(kept, want);
    }

    #[test]
    fn ema_shrinks_gap_by_one_minus_tau(seed in 0u64..1000, tau in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = DenseLayer::init_uniform(5, 3, Activation::Tanh, &mut rng);
        let mut target = DenseLayer::init_uniform(5, 3, Activation::Tanh, &mut rng);
        let before = target.clone();
        ema_layer(&mut target, &online, tau);
        for ((t, p), o) in target.slices().iter().zip(before.slices()).zip(online.slices()) {
            for ((tv, pv), ov) in t.iter().zip(p.iter()).zip(o.iter()) {
                prop_assert!(((ov - tv) - (1.0 - tau) * (ov - pv)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn td_step_is_semi_gradient(w in gvec(), psi in gvec(), psi_next in gvec(), r in -2.0f64..2.0, alpha in 0.0f64..0.1, gamma in 0.0f64..1.0) {
        let mut st = AdaptState::new(w.clone(), alpha, gamma, Rule::TdSarsa);
        let delta = st.g_update(r, &psi, &psi_next).unwrap();
        // d/dw ½δ² holding the bootstrap target fixed is −δψ
        let want_delta = r + gamma * dot(&psi_next, &w) - dot(&psi, &w);
        prop_assert!((delta - want_delta).abs() < 1e-10);
        prop_assert!((td_delta(r, &psi, &psi_next, &w, gamma) - delta).abs() == 0.0);
        for i in 0..w.len() {
            prop_assert!((st.w[i] - (w[i] + alpha * delta * psi[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn simplified_rule_is_td_at_zero_gamma_and_w(psi in gvec(), r in -2.0f64..2.0, alpha in 0.0f64..0.1) {
        let zeros = vec![0.0; psi.len()];
        let mut td = AdaptState::new(zeros.clone(), alpha, 0.0, Rule::TdSarsa);
        let mut simple = AdaptState::new(zeros, alpha, 0.0, Rule::Simplified);
        td.update(r, &psi, &psi).unwrap();
        simple.update(r, &psi, &psi).unwrap();
        prop_assert_eq!(td.w, simple.w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn checkpoint_roundtrip_is_exact(seed in any::<u64>()) {
        let ag = agent(seed);
        let ck = Checkpoint { agent: ag.clone(), adam_states: vec![] };
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.agent.checksum(), ag.checksum());
        prop_assert_eq!(back.agent, ag);
    }
}
