#include "cohortsim/curriculum.hpp"

#include "cohortsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cohortsim {

using nlohmann::json;

CurriculumGraph::CurriculumGraph(std::vector<Course> courses)
    : courses_(std::move(courses))
{
    const std::size_t n = courses_.size();
    for (std::size_t i = 0; i < n; ++i) {
        index_.emplace(courses_[i].id, i); // first occurrence wins on duplicates
    }
    prereq_indices_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& p : courses_[i].prerequisites) {
            auto it = index_.find(p);
            if (it != index_.end() && it->second != i) {
                prereq_indices_[i].push_back(it->second);
            }
        }
        std::sort(prereq_indices_[i].begin(), prereq_indices_[i].end());
        prereq_indices_[i].erase(std::unique(prereq_indices_[i].begin(), prereq_indices_[i].end()),
                                 prereq_indices_[i].end());
    }

    std::vector<std::size_t> by_id(n);
    std::iota(by_id.begin(), by_id.end(), 0);
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(courses_[a].id, a) < std::tie(courses_[b].id, b);
    });
    id_rank_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        id_rank_[by_id[r]] = r;
    }

    plan_order_ = by_id;
    std::stable_sort(plan_order_.begin(), plan_order_.end(), [&](std::size_t a, std::size_t b) {
        return courses_[a].nominal_semester < courses_[b].nominal_semester;
    });
}

std::optional<std::size_t> CurriculumGraph::index_of(std::string_view id) const
{
    auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t CurriculumGraph::bottleneck_count() const
{
    return static_cast<std::size_t>(std::count_if(courses_.begin(), courses_.end(),
                                                  [](const Course& c) { return c.is_bottleneck; }));
}

json CurriculumGraph::to_json() const
{
    json list = json::array();
    for (const auto& c : courses_) {
        list.push_back({{"id", c.id},
                        {"name", c.name},
                        {"nominal_semester", c.nominal_semester},
                        {"friction", c.friction},
                        {"is_bottleneck", c.is_bottleneck},
                        {"prerequisites", c.prerequisites}});
    }
    return json{{"courses", std::move(list)}};
}

namespace {

// Finds one directed cycle among `alive` nodes, following prerequisite edges.
std::vector<std::size_t> find_cycle(const CurriculumGraph& g, const std::vector<bool>& alive)
{
    const std::size_t n = g.course_count();
    enum Color : std::uint8_t { white, grey, black };
    std::vector<Color> color(n, white);

    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) {
            roots.push_back(i);
        }
    }
    std::sort(roots.begin(), roots.end(),
              [&](std::size_t a, std::size_t b) { return g.id_rank(a) < g.id_rank(b); });

    for (auto root : roots) {
        if (color[root] != white) {
            continue;
        }
        // iterative DFS: (node, next edge position)
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        color[root] = grey;
        while (!stack.empty()) {
            auto& [node, pos] = stack.back();
            const auto& pre = g.prerequisite_indices(node);
            if (pos == pre.size()) {
                color[node] = black;
                stack.pop_back();
                continue;
            }
            const std::size_t next = pre[pos++];
            if (!alive[next]) {
                continue;
            }
            if (color[next] == grey) {
                auto from = std::find_if(stack.begin(), stack.end(),
                                         [&](const auto& frame) { return frame.first == next; });
                std::vector<std::size_t> cycle;
                for (; from != stack.end(); ++from) {
                    cycle.push_back(from->first);
                }
                return cycle;
            }
            if (color[next] == white) {
                color[next] = grey;
                stack.emplace_back(next, 0);
            }
        }
    }
    return {};
}

std::string join_ids(const std::vector<std::string>& ids, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += ids[i];
    }
    return out;
}

} // namespace

ValidationReport validate_graph(const CurriculumGraph& g)
{
    ValidationReport report;
    auto add = [&](Finding::Kind kind, std::vector<std::string> ids, std::string msg) {
        report.findings.push_back(Finding{kind, std::move(ids), std::move(msg)});
    };

    std::set<std::string> seen;
    for (const auto& c : g.courses()) {
        if (!seen.insert(c.id).second) {
            add(Finding::Kind::duplicate_id, {c.id}, "duplicate course id " + c.id);
        }
    }

    for (const auto& c : g.courses()) {
        if (!(c.friction >= 0.0 && c.friction <= 1.0)) {
            add(Finding::Kind::friction_out_of_range, {c.id}, "friction out of range for " + c.id);
        }
        if (c.nominal_semester < 1 || c.nominal_semester > 10) {
            add(Finding::Kind::nominal_semester_out_of_range, {c.id},
                "nominal_semester out of range for " + c.id);
        }
        if (c.is_bottleneck && c.nominal_semester > 4) {
            add(Finding::Kind::late_bottleneck, {c.id},
                "bottleneck " + c.id + " scheduled after semester 4");
        }
        for (const auto& p : c.prerequisites) {
            if (p == c.id) {
                add(Finding::Kind::self_prerequisite, {c.id}, c.id + " lists itself as prerequisite");
            } else if (!g.index_of(p)) {
                add(Finding::Kind::dangling_prerequisite, {c.id, p},
                    c.id + " requires unknown course " + p);
            }
        }
    }

    // Kahn's algorithm; whatever survives sits on or behind a cycle.
    const std::size_t n = g.course_count();
    std::vector<std::size_t> pending(n);
    std::vector<std::vector<std::size_t>> dependents(n);
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = g.prerequisite_indices(i).size();
        for (auto p : g.prerequisite_indices(i)) {
            dependents[p].push_back(i);
        }
    }
    std::vector<bool> alive(n, true);
    auto prune = [&] {
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < n; ++i) {
            if (alive[i] && pending[i] == 0) {
                ready.push_back(i);
            }
        }
        while (!ready.empty()) {
            const auto i = ready.back();
            ready.pop_back();
            alive[i] = false;
            for (auto d : dependents[i]) {
                if (alive[d] && --pending[d] == 0) {
                    ready.push_back(d);
                }
            }
        }
    };
    prune();
    while (std::find(alive.begin(), alive.end(), true) != alive.end()) {
        auto cycle = find_cycle(g, alive);
        if (cycle.empty()) {
            break;
        }
        // rotate so the smallest id leads
        auto lead = std::min_element(cycle.begin(), cycle.end(), [&](std::size_t a, std::size_t b) {
            return g.id_rank(a) < g.id_rank(b);
        });
        std::rotate(cycle.begin(), lead, cycle.end());
        std::vector<std::string> ids;
        for (auto i : cycle) {
            ids.push_back(g.course(i).id);
        }
        add(Finding::Kind::cycle, ids, "prerequisite cycle: " + join_ids(ids, " -> "));
        // break the cycle and drop everything that becomes orderable
        for (auto i : cycle) {
            alive[i] = false;
            for (auto d : dependents[i]) {
                if (alive[d] && pending[d] > 0) {
                    --pending[d];
                }
            }
        }
        prune();
    }
    return report;
}

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  const std::string& where)
{
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown field '" + key + "'");
        }
    }
    for (auto key : allowed) {
        if (!obj.contains(std::string(key))) {
            throw ConfigError(where + ": missing field '" + std::string(key) + "'");
        }
    }
}

} // namespace

CurriculumGraph curriculum_from_json(const json& doc)
{
    if (!doc.is_object() || doc.size() != 1 || !doc.contains("courses") ||
        !doc["courses"].is_array()) {
        throw ConfigError("curriculum: expected {\"courses\": [...]}");
    }
    std::vector<Course> courses;
    std::size_t position = 0;
    for (const auto& item : doc["courses"]) {
        std::string where = "curriculum course #" + std::to_string(position++);
        if (item.is_object() && item.contains("id") && item["id"].is_string()) {
            where = "curriculum course " + item["id"].get<std::string>();
        }
        require_keys(item, {"id", "name", "nominal_semester", "friction", "is_bottleneck",
                            "prerequisites"},
                     where);
        try {
            Course c;
            c.id = item.at("id").get<std::string>();
            c.name = item.at("name").get<std::string>();
            if (!item.at("nominal_semester").is_number_integer()) {
                throw ConfigError(where + ": nominal_semester must be an integer");
            }
            c.nominal_semester = item.at("nominal_semester").get<int>();
            if (!item.at("friction").is_number()) {
                throw ConfigError(where + ": friction must be a number");
            }
            c.friction = item.at("friction").get<double>();
            if (!item.at("is_bottleneck").is_boolean()) {
                throw ConfigError(where + ": is_bottleneck must be a boolean");
            }
            c.is_bottleneck = item.at("is_bottleneck").get<bool>();
            c.prerequisites = item.at("prerequisites").get<std::vector<std::string>>();
            courses.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    CurriculumGraph graph(std::move(courses));
    auto report = validate_graph(graph);
    if (!report.ok()) {
        std::string msg = "curriculum validation failed:";
        for (const auto& f : report.findings) {
            msg += " [" + f.message + "]";
        }
        throw ConfigError(msg);
    }
    return graph;
}

CurriculumGraph load_curriculum(std::string_view source)
{
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("curriculum parse error: ") + e.what());
    }
    return curriculum_from_json(doc);
}

CurriculumGraph load_curriculum_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open curriculum file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_curriculum(buffer.str());
}

void Transcript::mark_passed(std::size_t i)
{
    if (state_[i] != State::passed) {
        state_[i] = State::passed;
        ++passed_count_;
    }
}

void Transcript::mark_regularized(std::size_t i)
{
    if (state_[i] == State::passed) {
        throw ContractError("cannot regularize a passed course");
    }
    state_[i] = State::regularized;
}

std::size_t Transcript::regularized_count() const
{
    return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), State::regularized));
}

int Transcript::total_failed_attempts() const
{
    return std::accumulate(failed_.begin(), failed_.end(), 0);
}

std::vector<std::size_t> available_courses(const CurriculumGraph& g, const Transcript& t,
                                           ScenarioKind regime, int workload_cap)
{
    std::vector<std::size_t> out;
    if (workload_cap <= 0) {
        return out;
    }
    const bool debt_counts = regime == ScenarioKind::historical;
    for (auto i : g.plan_order()) {
        if (t.passed(i) || (debt_counts && t.regularized(i))) {
            continue;
        }
        const auto& pre = g.prerequisite_indices(i);
        const bool ok = std::all_of(pre.begin(), pre.end(), [&](std::size_t p) {
            return t.passed(p) || (debt_counts && t.regularized(p));
        });
        if (ok) {
            out.push_back(i);
            if (static_cast<int>(out.size()) == workload_cap) {
                break;
            }
        }
    }
    return out;
}

json GeneratorConfig::to_json() const
{
    return json{{"course_count", course_count},
                {"semesters", semesters},
                {"bottleneck_count", bottleneck_count},
                {"bottleneck_frictions", bottleneck_frictions},
                {"bottleneck_names", bottleneck_names},
                {"friction_min", friction_min},
                {"friction_max", friction_max},
                {"chain_density", chain_density},
                {"min_blocked_share", min_blocked_share}};
}

GeneratorConfig GeneratorConfig::from_json(const json& doc)
{
    GeneratorConfig p;
    if (!doc.is_object()) {
        throw ConfigError("curriculum generator: expected an object");
    }
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "course_count") {
                p.course_count = value.get<int>();
            } else if (key == "semesters") {
                p.semesters = value.get<int>();
            } else if (key == "bottleneck_count") {
                p.bottleneck_count = value.get<int>();
            } else if (key == "bottleneck_frictions") {
                p.bottleneck_frictions = value.get<std::vector<double>>();
            } else if (key == "bottleneck_names") {
                p.bottleneck_names = value.get<std::vector<std::string>>();
            } else if (key == "friction_min") {
                p.friction_min = value.get<double>();
            } else if (key == "friction_max") {
                p.friction_max = value.get<double>();
            } else if (key == "chain_density") {
                p.chain_density = value.get<double>();
            } else if (key == "min_blocked_share") {
                p.min_blocked_share = value.get<double>();
            } else if (key != "seed") {
                throw ConfigError("curriculum generator: unknown field '" + key + "'");
            }
        } catch (const json::exception& e) {
            throw ConfigError("curriculum generator field '" + key + "': " + e.what());
        }
    }
    return p;
}

std::vector<std::size_t> downstream_of(const CurriculumGraph& g, std::size_t index)
{
    const std::size_t n = g.course_count();
    std::vector<std::vector<std::size_t>> dependents(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto p : g.prerequisite_indices(i)) {
            dependents[p].push_back(i);
        }
    }
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{index};
    std::vector<std::size_t> out;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (auto d : dependents[i]) {
            if (!seen[d]) {
                seen[d] = true;
                out.push_back(d);
                stack.push_back(d);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

CurriculumGraph generate_synthetic_curriculum(const GeneratorConfig& p, std::uint64_t seed)
{
    if (p.course_count < 1) {
        throw ConfigError("generator: course_count must be >= 1");
    }
    if (p.semesters < 1 || p.semesters > 10) {
        throw ConfigError("generator: semesters must be in 1..10");
    }
    if (p.bottleneck_count < 0) {
        throw ConfigError("generator: bottleneck_count must be >= 0");
    }
    if (static_cast<int>(p.bottleneck_frictions.size()) < p.bottleneck_count) {
        throw ConfigError("generator: fewer bottleneck_frictions than bottlenecks");
    }
    if (!(0.0 <= p.friction_min && p.friction_min <= p.friction_max && p.friction_max <= 1.0)) {
        throw ConfigError("generator: friction range must satisfy 0 <= min <= max <= 1");
    }
    if (p.chain_density < 0.0 || p.chain_density > 1.0) {
        throw ConfigError("generator: chain_density must be in [0,1]");
    }

    const int n = p.course_count;
    std::vector<int> semester(n);
    for (int i = 0; i < n; ++i) {
        semester[i] = 1 + static_cast<int>(static_cast<long>(i) * p.semesters / n);
    }
    const int year1_slots =
        static_cast<int>(std::count_if(semester.begin(), semester.end(), [](int s) { return s <= 2; }));
    if (p.bottleneck_count > year1_slots) {
        throw ConfigError("generator: " + std::to_string(p.bottleneck_count) +
                          " bottlenecks do not fit in " + std::to_string(year1_slots) +
                          " year-1 slots");
    }

    RandomStream rng(mix_key({seed, static_cast<std::uint64_t>(Purpose::curriculum)}));
    const int width = n >= 100 ? 3 : 2;

    std::vector<Course> courses(n);
    for (int i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "C%0*d", width, i + 1);
        Course& c = courses[i];
        c.id = id;
        c.nominal_semester = semester[i];
        if (i < p.bottleneck_count) {
            c.is_bottleneck = true;
            c.friction = p.bottleneck_frictions[i];
            c.name = i < static_cast<int>(p.bottleneck_names.size()) ? p.bottleneck_names[i]
                                                                     : "Bottleneck " + c.id;
        } else {
            c.friction = p.friction_min + (p.friction_max - p.friction_min) * rng.uniform();
            c.friction = std::round(c.friction * 1000.0) / 1000.0;
            c.name = "Course " + c.id;
        }
    }

    // reaches[i]: course i is a bottleneck or transitively requires one
    std::vector<bool> reaches(n, false);
    for (int i = 0; i < p.bottleneck_count; ++i) {
        reaches[i] = true;
    }
    for (int i = p.bottleneck_count; i < n; ++i) {
        if (semester[i] == 1) {
            continue;
        }
        std::vector<int> pool;
        for (int j = 0; j < i; ++j) {
            if (semester[j] == semester[i] - 1 && reaches[j]) {
                pool.push_back(j);
            }
        }
        if (pool.empty()) {
            for (int j = 0; j < p.bottleneck_count; ++j) {
                pool.push_back(j);
            }
        }
        std::set<int> prereqs;
        if (!pool.empty()) {
            prereqs.insert(pool[static_cast<std::size_t>(rng.uniform() * pool.size())]);
        }
        for (int j = 0; j < i; ++j) {
            if (semester[j] < semester[i] && rng.bernoulli(p.chain_density)) {
                prereqs.insert(j);
            }
        }
        for (int j : prereqs) {
            courses[i].prerequisites.push_back(courses[j].id);
            reaches[i] = reaches[i] || reaches[j];
        }
    }

    // Widen each bottleneck's reach until it blocks the configured share of later courses.
    int later = static_cast<int>(std::count_if(semester.begin(), semester.end(),
                                               [](int s) { return s > 2; }));
    for (int b = 0; b < p.bottleneck_count && later > 0; ++b) {
        while (true) {
            CurriculumGraph probe(courses);
            auto down = downstream_of(probe, static_cast<std::size_t>(b));
            std::vector<bool> blocked(n, false);
            for (auto d : down) {
                blocked[d] = true;
            }
            int count = 0;
            for (int i = 0; i < n; ++i) {
                count += (semester[i] > 2 && blocked[i]) ? 1 : 0;
            }
            if (count >= std::ceil(p.min_blocked_share * later - 1e-12)) {
                break;
            }
            // earliest later course not yet blocked by b
            int target = -1;
            for (int i = 0; i < n; ++i) {
                if (semester[i] > 2 && !blocked[i]) {
                    target = i;
                    break;
                }
            }
            if (target < 0) {
                break;
            }
            courses[target].prerequisites.push_back(courses[b].id);
        }
    }

    for (auto& c : courses) {
        std::sort(c.prerequisites.begin(), c.prerequisites.end());
    }
    CurriculumGraph graph(std::move(courses));
    auto report = validate_graph(graph);
    if (!report.ok()) {
        throw ConfigError("generator produced an invalid graph: " + report.findings.front().message);
    }
    return graph;
}

} // namespace cohortsim
