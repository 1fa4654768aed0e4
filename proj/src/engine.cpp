#include "cohortsim/engine.hpp"

#include "cohortsim/output.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace cohortsim {

int RemedialRound::accepted() const
{
    return static_cast<int>(std::count_if(decisions.begin(), decisions.end(),
                                          [](const RemedialDecision& d) { return d.accepted; }));
}

std::size_t ExperimentResult::agent_record_count() const
{
    std::size_t n = 0;
    for (const auto& s : scenarios) {
        for (const auto& r : s.replications) {
            n += r.agents.size();
        }
    }
    return n;
}

std::uint64_t replication_seed(std::uint64_t master_seed, ScenarioKind kind, int rep)
{
    return mix_key({master_seed, 0x5CE7A410ULL + static_cast<std::uint64_t>(kind),
                    static_cast<std::uint64_t>(rep)});
}

WorldState make_world(const ExperimentConfig& cfg, const ScenarioPolicy& policy, int rep_index)
{
    WorldState w;
    w.config = &cfg;
    w.policy = policy;
    w.psych = cfg.psych;
    w.psych.remedial_stress_cost = policy.remedial_stress_cost;
    w.psych.remedial_belonging_bonus = policy.remedial_belonging_bonus;
    for (const auto& f :
         effective_frictions(cfg.curriculum, policy, cfg.representative_ability(policy))) {
        w.frictions.push_back(f.friction);
    }
    w.seed = replication_seed(cfg.master_seed, policy.kind, rep_index);
    w.agents = sample_cohort(cfg.archetypes, cfg.cohort_size, w.seed);
    w.archetype_of.reserve(w.agents.size());
    for (auto& a : w.agents) {
        a.transcript = Transcript(cfg.curriculum.course_count());
        w.archetype_of.push_back(&cfg.archetypes.by_id(a.archetype_id));
    }
    return w;
}

DropoutCause classify_dropout_cause(const AgentState& agent, int debt_cause_threshold)
{
    if (agent.status != AgentStatus::dropped) {
        throw ContractError("dropout cause requested for agent " + std::to_string(agent.agent_id) +
                            " which has not dropped out");
    }
    if (static_cast<int>(agent.finals_debt.size()) >= debt_cause_threshold) {
        return DropoutCause::normative;
    }
    if (agent.transcript.total_failed_attempts() >= 1) {
        return DropoutCause::academic;
    }
    return DropoutCause::other;
}

namespace {

using Kind = SemesterEvent::Kind;

void check_graduation(AgentState& agent, std::size_t course_count, int semester)
{
    if (agent.active() && agent.transcript.passed_count() == course_count) {
        agent.status = AgentStatus::graduated;
        agent.graduation_semester = semester;
    }
}

} // namespace

std::vector<AgentEvents> step_semester(WorldState& w, int semester)
{
    const ExperimentConfig& cfg = *w.config;
    const CurriculumGraph& g = cfg.curriculum;
    const ScenarioPolicy& policy = w.policy;
    if (semester < 1 || semester > cfg.horizon_semesters) {
        throw ContractError("semester outside the simulation horizon");
    }
    const bool historical = policy.kind == ScenarioKind::historical;
    const bool safety_net = policy.kind == ScenarioKind::safety_net;

    std::vector<AgentEvents> all_events;
    std::vector<SemesterOutcome> near_passes;
    std::vector<SemesterEvent> course_events;

    for (std::size_t idx = 0; idx < w.agents.size(); ++idx) {
        AgentState& agent = w.agents[idx];
        if (!agent.active()) {
            continue;
        }
        const Archetype& arch = *w.archetype_of[idx];
        const auto id = static_cast<std::uint64_t>(agent.agent_id);
        const auto sem = static_cast<std::uint64_t>(semester);

        AgentEvents record{agent.agent_id, {}};
        course_events.clear();

        const auto offered =
            available_courses(g, agent.transcript, policy.kind, workload_cap(arch.planning_horizon));
        auto attempts = agent_stream(w.seed, id, sem, Purpose::attempts);
        for (auto c : offered) {
            const Course& course = g.course(c);
            AttemptOutcome out;
            if (historical) {
                out = attempt_course_regularity(agent, arch.ability, course, c, policy, semester,
                                                attempts);
            } else {
                out = attempt_course_promotion(agent, arch.ability, course, c, w.frictions[c], policy,
                                               attempts);
                if (out.near_pass) {
                    near_passes.push_back(
                        SemesterOutcome{agent.agent_id, arch.resilience, course.is_bottleneck, out});
                }
            }
            Kind kind = Kind::fail;
            if (out.result == AttemptOutcome::Result::passed) {
                kind = Kind::pass;
            } else if (out.result == AttemptOutcome::Result::regularized) {
                kind = Kind::regularize;
            }
            course_events.push_back(SemesterEvent{kind, c, w.frictions[c], 0});
        }
        std::sort(course_events.begin(), course_events.end(),
                  [&](const SemesterEvent& a, const SemesterEvent& b) {
                      return g.id_rank(*a.course) < g.id_rank(*b.course);
                  });
        record.events = course_events;

        if (historical) {
            auto debt_rng = agent_stream(w.seed, id, sem, Purpose::debt);
            auto resolved =
                resolve_finals_debt(agent, arch.ability, g, policy, debt_rng, semester);
            std::sort(resolved.begin(), resolved.end(), [&](std::size_t a, std::size_t b) {
                return g.id_rank(a) < g.id_rank(b);
            });
            for (auto c : resolved) {
                record.events.push_back(SemesterEvent{Kind::pass, c, w.frictions[c], 0});
            }
            if (!agent.finals_debt.empty()) {
                record.events.push_back(SemesterEvent{Kind::debt_tick, std::nullopt, 0.0,
                                                      static_cast<int>(agent.finals_debt.size())});
            }
        } else if (!agent.finals_debt.empty()) {
            throw std::logic_error("finals debt present under a direct-promotion regime");
        }

        for (const auto& e : record.events) {
            apply_event(agent, e, arch, w.psych);
        }

        check_graduation(agent, g.course_count(), semester);
        if (agent.active()) {
            auto rng = agent_stream(w.seed, id, sem, Purpose::dropout);
            if (sample_dropout(dropout_hazard(agent.stress, agent.belonging, cfg.hazard), rng)) {
                agent.status = AgentStatus::dropped;
                agent.dropout_semester = semester;
                agent.dropout_cause = classify_dropout_cause(agent, cfg.debt_cause_threshold);
            }
        }
        all_events.push_back(std::move(record));
    }

    if (safety_net) {
        // candidates who left this semester no longer compete for slots
        std::erase_if(near_passes, [&](const SemesterOutcome& o) {
            return !w.agents[static_cast<std::size_t>(o.agent_id)].active();
        });
        const int active = static_cast<int>(std::count_if(
            w.agents.begin(), w.agents.end(), [](const AgentState& a) { return a.active(); }));
        const auto pool = collect_remedial_pool(near_passes, policy);

        RemedialRound round;
        round.semester = semester;
        round.active_count = active;
        round.capacity = remedial_capacity(active, policy);
        round.decisions = allocate_remedial(pool, active, policy);

        for (const auto& d : round.decisions) {
            if (!d.accepted) {
                continue;
            }
            const auto idx = static_cast<std::size_t>(d.agent_id);
            AgentState& agent = w.agents[idx];
            const Archetype& arch = *w.archetype_of[idx];
            ++agent.remedial_acceptances;

            bool success = true;
            if (policy.remedial_mode == RemedialMode::probabilistic) {
                RandomStream rng(mix_key({w.seed, static_cast<std::uint64_t>(d.agent_id),
                                          static_cast<std::uint64_t>(semester),
                                          static_cast<std::uint64_t>(Purpose::remedial), d.course}));
                const double mean = arch.ability * (1.0 - w.frictions[d.course]) +
                                    policy.remedial_pass_prob_boost;
                const double score =
                    std::clamp(mean + policy.performance_sd * rng.normal(), 0.0, 1.0);
                success = score >= policy.pass_threshold;
            }
            std::vector<SemesterEvent> events{
                SemesterEvent{Kind::remedial_accept, d.course, w.frictions[d.course], 0}};
            if (success) {
                agent.transcript.mark_passed(d.course);
                events.push_back(
                    SemesterEvent{Kind::remedial_success, d.course, w.frictions[d.course], 0});
            }
            for (const auto& e : events) {
                apply_event(agent, e, arch, w.psych);
            }
            auto it = std::lower_bound(
                all_events.begin(), all_events.end(), d.agent_id,
                [](const AgentEvents& r, int agent_id) { return r.agent_id < agent_id; });
            if (it != all_events.end() && it->agent_id == d.agent_id) {
                it->events.insert(it->events.end(), events.begin(), events.end());
            }
            check_graduation(agent, g.course_count(), semester);
        }
        w.remedial_rounds.push_back(std::move(round));
    }
    return all_events;
}

ReplicationResult run_replication(const ExperimentConfig& cfg, const ScenarioPolicy& policy,
                                  int rep_index)
{
    cfg.validate();
    WorldState world = make_world(cfg, policy, rep_index);
    ReplicationResult result;
    result.scenario = policy.kind;
    result.replication = rep_index;
    result.seed = world.seed;
    result.semesters.reserve(static_cast<std::size_t>(cfg.horizon_semesters));

    for (int s = 1; s <= cfg.horizon_semesters; ++s) {
        step_semester(world, s);

        SemesterAggregate agg;
        agg.semester = s;
        double stress = 0.0;
        double belonging = 0.0;
        for (const auto& a : world.agents) {
            switch (a.status) {
            case AgentStatus::active:
                ++agg.active;
                stress += a.stress;
                belonging += a.belonging;
                break;
            case AgentStatus::dropped:
                ++agg.dropped;
                break;
            case AgentStatus::graduated:
                ++agg.graduated;
                break;
            }
        }
        if (agg.active + agg.dropped + agg.graduated != cfg.cohort_size) {
            throw std::logic_error("agent conservation violated");
        }
        if (agg.active > 0) {
            agg.mean_stress_active = stress / agg.active;
            agg.mean_belonging_active = belonging / agg.active;
        }
        result.semesters.push_back(agg);
    }
    result.agents = std::move(world.agents);
    result.remedial_rounds = std::move(world.remedial_rounds);
    return result;
}

int resolve_threads(int requested)
{
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& job)
{
    const int workers = std::min(std::max(1, threads), std::max(1, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) {
            job(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options)
{
    cfg.validate();
    const int reps = cfg.replications_per_scenario;
    const int n_scen = static_cast<int>(cfg.scenarios.size());

    ExperimentResult result;
    result.scenarios.resize(static_cast<std::size_t>(n_scen));
    for (int s = 0; s < n_scen; ++s) {
        result.scenarios[static_cast<std::size_t>(s)].policy = cfg.scenarios[static_cast<std::size_t>(s)];
        result.scenarios[static_cast<std::size_t>(s)].replications.resize(static_cast<std::size_t>(reps));
    }

    const int threads = resolve_threads(options.threads.value_or(cfg.threads));
    parallel_for(n_scen * reps, threads, [&](int task) {
        const auto s = static_cast<std::size_t>(task / reps);
        const int r = task % reps;
        result.scenarios[s].replications[static_cast<std::size_t>(r)] =
            run_replication(cfg, cfg.scenarios[s], r);
    });

    char line[256];
    for (const auto& policy : cfg.scenarios) {
        const double rep_ability = cfg.representative_ability(policy);
        const auto frictions = effective_frictions(cfg.curriculum, policy, rep_ability);
        for (std::size_t c = 0; c < frictions.size(); ++c) {
            if (frictions[c].clamped) {
                std::snprintf(line, sizeof line,
                              "%s: effective friction for %s clamped to %.6f (target infeasible)",
                              std::string(scenario_label(policy.kind)).c_str(),
                              cfg.curriculum.course(c).id.c_str(), frictions[c].friction);
                result.log.emplace_back(line);
            }
        }
    }
    for (const auto& run : result.scenarios) {
        if (run.policy.kind != ScenarioKind::safety_net) {
            continue;
        }
        long slots = 0;
        long used = 0;
        for (const auto& rep : run.replications) {
            for (const auto& round : rep.remedial_rounds) {
                slots += round.capacity;
                used += round.accepted();
            }
        }
        std::snprintf(line, sizeof line,
                      "%s: remedial capacity utilisation %.6f (%ld of %ld slots used)",
                      std::string(scenario_label(run.policy.kind)).c_str(),
                      slots > 0 ? static_cast<double>(used) / static_cast<double>(slots) : 0.0, used,
                      slots);
        result.log.emplace_back(line);
    }

    if (options.output_dir) {
        write_experiment_outputs(cfg, result, *options.output_dir);
    }
    return result;
}

} // namespace cohortsim
