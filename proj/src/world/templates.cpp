// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/world/templates.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hintcoach/action/value.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/world/table.hpp"

namespace hintcoach::world {

using action::format_number;
using action::parse_number;
using action::round_decimal;
using action::Table;

namespace {

const std::vector<std::string>& row_at(const Table& t, SplitMix64& rng) {
    return t.rows[static_cast<std::size_t>(rng.below(t.rows.size()))];
}

std::string cell(const Table& t, const std::vector<std::string>& row, const std::string& column) {
    return row[column_index(t, column)];
}

/// Brute-force row scan used by oracles; independent of the condition parser.
template <typename Pred>
std::vector<const std::vector<std::string>*> scan(const Table& t, Pred pred) {
    std::vector<const std::vector<std::string>*> out;
    for (const auto& row : t.rows) {
        if (pred(row)) out.push_back(&row);
    }
    return out;
}

double num(const std::string& s) { return parse_number(s).value_or(0.0); }

std::string complete_cell(const std::string& report, const std::string& answer_expr) {
    return fmt::format("complete_task('{}', {})", report, answer_expr);
}

std::optional<TaskInstance> flights_extra_minutes(const World& w, SplitMix64& rng) {
    const Table& t = w.table("flights");
    const auto& row = row_at(t, rng);
    std::string carrier = cell(t, row, "IATA_Code_Marketing_Airline");
    std::string number = cell(t, row, "Flight_Number_Marketing_Airline");
    std::string date = cell(t, row, "FlightDate");
    auto hits = scan(t, [&](const auto& r) {
        return cell(t, r, "IATA_Code_Marketing_Airline") == carrier &&
               cell(t, r, "Flight_Number_Marketing_Airline") == number && cell(t, r, "FlightDate") == date;
    });
    if (hits.size() != 1) return std::nullopt;
    double extra = num(cell(t, row, "ArrDelayMinutes")) - num(cell(t, row, "DepDelayMinutes"));
    TaskInstance inst;
    inst.description = fmt::format(
        "How many extra minutes did the {}{} flight from {} to {} on {} take, i.e. its arrival delay minus its "
        "departure delay?",
        carrier, number, cell(t, row, "Origin"), cell(t, row, "Dest"), date);
    inst.expected_answer = format_number(extra);
    inst.reference_cells = {
        "db = load_db('flights')",
        fmt::format("rows = data_filter(db, 'IATA_Code_Marketing_Airline={}; Flight_Number_Marketing_Airline={}; "
                    "FlightDate={}')\nprint(len(rows))",
                    carrier, number, date),
        "extra = to_number(get_value(rows, 'ArrDelayMinutes')) - to_number(get_value(rows, 'DepDelayMinutes'))\n"
        "print(extra)",
        complete_cell("Subtracted the departure delay from the arrival delay.", "to_text(extra)"),
    };
    return inst;
}

std::optional<TaskInstance> flights_long_count(const World& w, SplitMix64& rng) {
    const Table& t = w.table("flights");
    std::string date = cell(t, row_at(t, rng), "FlightDate");
    static const std::vector<int> kThresholds = {300, 500, 1000};
    int threshold = kThresholds[static_cast<std::size_t>(rng.below(kThresholds.size()))];
    auto hits = scan(t, [&](const auto& r) {
        return cell(t, r, "FlightDate") == date && num(cell(t, r, "Distance")) > threshold;
    });
    TaskInstance inst;
    inst.description =
        fmt::format("How many flights on {} covered a distance of more than {} miles?", date, threshold);
    inst.expected_answer = std::to_string(hits.size());
    inst.reference_cells = {
        "db = load_db('flights')",
        fmt::format("rows = data_filter(db, 'FlightDate={}; Distance>{}')\nprint(len(rows))", date, threshold),
        complete_cell("Counted the matching flights.", "to_text(len(rows))"),
    };
    return inst;
}

std::optional<TaskInstance> flights_avg_dep_delay(const World& w, SplitMix64& rng) {
    const Table& t = w.table("flights");
    const auto& row = row_at(t, rng);
    std::string origin = cell(t, row, "Origin");
    std::string date = cell(t, row, "FlightDate");
    auto hits = scan(t, [&](const auto& r) { return cell(t, r, "Origin") == origin && cell(t, r, "FlightDate") == date; });
    double total = 0.0;
    for (const auto* r : hits) total += num(cell(t, *r, "DepDelayMinutes"));
    double avg = round_decimal(total / static_cast<double>(hits.size()), 2);
    TaskInstance inst;
    inst.description = fmt::format(
        "What was the average departure delay in minutes of flights departing from {} on {}? Round to 2 decimal "
        "places.",
        origin, date);
    inst.expected_answer = format_number(avg);
    inst.reference_cells = {
        "db = load_db('flights')",
        fmt::format("rows = data_filter(db, 'Origin={}; FlightDate={}')\nprint(len(rows))", origin, date),
        "delays = to_numbers(split(get_value(rows, 'DepDelayMinutes'), ', '))\n"
        "avg = round(sum(delays) / len(delays), 2)\nprint(avg)",
        complete_cell("Averaged the departure delays.", "to_text(avg)"),
    };
    return inst;
}

std::optional<TaskInstance> coffee_range(const World& w, SplitMix64& rng) {
    const Table& t = w.table("coffee");
    if (t.rows.size() < 2) return std::nullopt;
    std::size_t span = 2 + static_cast<std::size_t>(rng.below(5));
    span = std::min(span, t.rows.size());
    std::size_t start = static_cast<std::size_t>(rng.below(t.rows.size() - span + 1));
    std::string d1 = cell(t, t.rows[start], "Date");
    std::string d2 = cell(t, t.rows[start + span - 1], "Date");
    auto hits = scan(t, [&](const auto& r) { return cell(t, r, "Date") >= d1 && cell(t, r, "Date") <= d2; });
    double hi = -1e300;
    double lo = 1e300;
    for (const auto* r : hits) {
        hi = std::max(hi, num(cell(t, *r, "High")));
        lo = std::min(lo, num(cell(t, *r, "Low")));
    }
    TaskInstance inst;
    inst.description = fmt::format(
        "What was the coffee price range (highest High minus lowest Low) from {} to {}, inclusive? Round to 2 "
        "decimal places.",
        d1, d2);
    inst.expected_answer = format_number(round_decimal(hi - lo, 2));
    inst.reference_cells = {
        "db = load_db('coffee')",
        fmt::format("rows = data_filter(db, 'Date>={}; Date<={}')\nprint(len(rows))", d1, d2),
        "highs = to_numbers(split(get_value(rows, 'High'), ', '))\nlows = to_numbers(split(get_value(rows, 'Low'), "
        "', '))\nspread = round(max(highs) - min(lows), 2)\nprint(spread)",
        complete_cell("Took the maximum High minus the minimum Low.", "to_text(spread)"),
    };
    return inst;
}

std::optional<TaskInstance> coffee_close(const World& w, SplitMix64& rng) {
    const Table& t = w.table("coffee");
    const auto& row = row_at(t, rng);
    std::string date = cell(t, row, "Date");
    auto hits = scan(t, [&](const auto& r) { return cell(t, r, "Date") == date; });
    if (hits.size() != 1) return std::nullopt;
    TaskInstance inst;
    inst.description = fmt::format("What was the closing coffee price on {}?", date);
    inst.expected_answer = cell(t, row, "Close");
    inst.reference_cells = {
        "db = load_db('coffee')",
        fmt::format("rows = data_filter(db, 'Date={}')\nclose = get_value(rows, 'Close')\nprint(close)", date),
        complete_cell("Read the Close column.", "close"),
    };
    return inst;
}

std::optional<TaskInstance> yelp_top_review(const World& w, SplitMix64& rng) {
    const Table& t = w.table("yelp");
    const auto& row = row_at(t, rng);
    std::string city = cell(t, row, "city");
    std::string category = cell(t, row, "categories");
    auto hits = scan(t, [&](const auto& r) { return cell(t, r, "city") == city && cell(t, r, "categories") == category; });
    double best = -1;
    for (const auto* r : hits) best = std::max(best, num(cell(t, *r, "review_count")));
    std::vector<std::string> winners;
    for (const auto* r : hits) {
        if (num(cell(t, *r, "review_count")) == best) winners.push_back(cell(t, *r, "name"));
    }
    if (winners.size() != 1) return std::nullopt;
    TaskInstance inst;
    inst.description =
        fmt::format("Which business in {} with the category '{}' has the highest review count?", city, category);
    inst.expected_answer = winners.front();
    inst.reference_cells = {
        "db = load_db('yelp')",
        fmt::format("rows = data_filter(db, 'city={}; categories={}')\nprint(len(rows))", city, category),
        "counts = to_numbers(split(get_value(rows, 'review_count'), ', '))\n"
        "top = data_filter(rows, 'review_count=' + to_text(max(counts)))\nname = get_value(top, 'name')\nprint(name)",
        complete_cell("Picked the row with the maximum review count.", "name"),
    };
    return inst;
}

std::optional<TaskInstance> yelp_stars(const World& w, SplitMix64& rng) {
    const Table& t = w.table("yelp");
    const auto& row = row_at(t, rng);
    std::string name = cell(t, row, "name");
    std::string city = cell(t, row, "city");
    auto hits = scan(t, [&](const auto& r) { return cell(t, r, "name") == name && cell(t, r, "city") == city; });
    if (hits.size() != 1) return std::nullopt;
    TaskInstance inst;
    inst.description = fmt::format("What is the star rating of {} in {}?", name, city);
    inst.expected_answer = cell(t, row, "stars");
    inst.reference_cells = {
        "db = load_db('yelp')",
        fmt::format("rows = data_filter(db, 'name={}; city={}')\nstars = get_value(rows, 'stars')\nprint(stars)", name,
                    city),
        complete_cell("Read the stars column.", "stars"),
    };
    return inst;
}

std::optional<TaskInstance> dblp_authors(const World& w, SplitMix64& rng) {
    const Graph& g = w.graphs->paper_net;
    if (g.nodes.empty()) return std::nullopt;
    auto it = g.nodes.begin();
    std::advance(it, static_cast<long>(rng.below(g.nodes.size())));
    TaskInstance inst;
    inst.description = fmt::format("Who are the authors of the paper '{}'?", it->first);
    inst.expected_answer = it->second.at("authors");
    inst.reference_cells = {
        "graph = load_graph('dblp')",
        fmt::format("paper = check_nodes(graph, 'PaperNet', '{}')\nauthors = get_value(paper, 'authors')\n"
                    "print(authors)",
                    it->first),
        complete_cell("Read the authors attribute of the paper node.", "authors"),
    };
    return inst;
}

std::optional<TaskInstance> dblp_collaborations(const World& w, SplitMix64& rng) {
    const Graph& g = w.graphs->author_net;
    if (g.edges.empty()) return std::nullopt;
    auto it = g.edges.begin();
    std::advance(it, static_cast<long>(rng.below(g.edges.size())));
    bool flip = rng.below(2) == 1;
    const std::string& a = flip ? it->first.second : it->first.first;
    const std::string& b = flip ? it->first.first : it->first.second;
    TaskInstance inst;
    inst.description = fmt::format("How many papers did {} and {} write together?", a, b);
    inst.expected_answer = it->second.at("weight");
    inst.reference_cells = {
        "graph = load_graph('dblp')",
        fmt::format("edge = check_edges(graph, 'AuthorNet', '{}', '{}')\nn = get_value(edge, 'weight')\nprint(n)", a, b),
        complete_cell("Read the collaboration edge weight.", "n"),
    };
    return inst;
}

std::optional<TaskInstance> agenda_location(const World& w, SplitMix64& rng) {
    if (w.agenda.empty()) return std::nullopt;
    const AgendaDoc& doc = w.agenda[static_cast<std::size_t>(rng.below(w.agenda.size()))];
    std::string query = doc.person + " " + doc.event;
    auto top = retrieve_agenda(w, query, 1);
    if (top.empty() || top.front() != &doc) return std::nullopt;
    for (const auto& other : w.agenda) {
        if (&other != &doc && other.person == doc.person && other.event == doc.event) return std::nullopt;
    }
    TaskInstance inst;
    inst.description = fmt::format("Where will {} attend the {} on {}?", doc.person, doc.event, doc.date_words);
    inst.expected_answer = doc.location;
    inst.reference_cells = {
        fmt::format("docs = retrieve_agenda('{}', 1)\nprint(docs)", query),
        "place = split(split(docs[0], ' at ')[1], ' from ')[0]\nprint(place)",
        complete_cell("Read the location from the agenda entry.", "place"),
    };
    return inst;
}

} // namespace

const std::vector<TaskTemplate>& builtin_templates() {
    static const std::vector<TaskTemplate> kTemplates = {
        {"flights_extra_minutes", "flights",
         "How many extra minutes did the [carrier][number] flight from [origin] to [dest] on [date] take?",
         flights_extra_minutes},
        {"flights_long_count", "flights", "How many flights on [date] covered more than [miles] miles?",
         flights_long_count},
        {"flights_avg_dep_delay", "flights",
         "What was the average departure delay of flights departing from [origin] on [date]?", flights_avg_dep_delay},
        {"coffee_range", "coffee", "What was the coffee price range from [date1] to [date2]?", coffee_range},
        {"coffee_close", "coffee", "What was the closing coffee price on [date]?", coffee_close},
        {"yelp_top_review", "yelp", "Which business in [city] with the category [category] has the highest review count?",
         yelp_top_review},
        {"yelp_stars", "yelp", "What is the star rating of [business] in [city]?", yelp_stars},
        {"dblp_authors", "dblp", "Who are the authors of the paper [title]?", dblp_authors},
        {"dblp_collaborations", "dblp", "How many papers did [author1] and [author2] write together?",
         dblp_collaborations},
        {"agenda_location", "agenda", "Where will [person] attend the [event] on [date]?", agenda_location},
    };
    return kTemplates;
}

const TaskTemplate& find_template(const std::string& template_id) {
    for (const auto& t : builtin_templates()) {
        if (t.template_id == template_id) return t;
    }
    throw NotFoundError("no template named '" + template_id + "'");
}

std::vector<std::string> all_groups() { return {"flights", "coffee", "yelp", "dblp", "agenda"}; }

std::vector<std::string> group_tools(const std::string& group) {
    if (group == "flights" || group == "coffee" || group == "yelp") {
        return {"load_db", "data_filter", "get_value", kCompleteTaskTool};
    }
    if (group == "dblp") return {"load_graph", "check_nodes", "check_neighbours", "check_edges", "get_value", kCompleteTaskTool};
    if (group == "agenda") return {"retrieve_agenda", kCompleteTaskTool};
    throw NotFoundError("unknown task group '" + group + "'");
}

std::map<Split, int> split_counts(int n, const SplitRatios& r) {
    if (r.train < 0 || r.valid < 0 || r.test < 0) throw ValidationError("split_ratios", "ratios must be non-negative");
    if (std::fabs(r.train + r.valid + r.test - 1.0) > 1e-6) {
        throw ValidationError("split_ratios", "ratios must sum to 1");
    }
    const Split order[] = {Split::Train, Split::Valid, Split::Test};
    const double ratio[] = {r.train, r.valid, r.test};
    int counts[3];
    double rema[3];
    int assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = ratio[i] * n;
        counts[i] = static_cast<int>(std::floor(exact + 1e-9));
        rema[i] = exact - counts[i];
        assigned += counts[i];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
            if (rema[i] > rema[best] + 1e-12) best = i;
        }
        ++counts[best];
        rema[best] = -1;
        ++assigned;
    }
    if (n >= 3) {
        for (int i = 0; i < 3; ++i) {
            if (ratio[i] <= 0 || counts[i] > 0) continue;
            int donor = static_cast<int>(std::max_element(counts, counts + 3) - counts);
            --counts[donor];
            ++counts[i];
        }
    }
    std::map<Split, int> out;
    for (int i = 0; i < 3; ++i) out[order[i]] = counts[i];
    return out;
}

InstantiateResult instantiate_tasks(const World& world, const std::vector<TaskTemplate>& templates,
                                    int n_per_template, const SplitRatios& ratios, std::uint64_t seed,
                                    int max_attempts) {
    if (n_per_template < 0) throw ValidationError("n_per_template", "must be non-negative");
    auto counts = split_counts(n_per_template, ratios);
    InstantiateResult result;
    for (const auto& tmpl : templates) {
        SplitMix64 rng(derive_seed(seed, "tasks/" + tmpl.template_id));
        std::vector<TaskInstance> drawn;
        std::set<std::string> seen;
        for (int i = 0; i < n_per_template; ++i) {
            bool filled = false;
            for (int attempt = 0; attempt < max_attempts; ++attempt) {
                auto inst = tmpl.draw(world, rng);
                if (inst && seen.insert(inst->description).second) {
                    drawn.push_back(std::move(*inst));
                    filled = true;
                    break;
                }
                ++result.redraws;
            }
            if (!filled) {
                result.warnings.push_back(fmt::format("template {} produced only {} of {} distinct unambiguous instances",
                                                      tmpl.template_id, drawn.size(), n_per_template));
                break;
            }
        }

        // Split assignment: a seeded permutation of instance slots, filled train, valid, test.
        auto local = split_counts(static_cast<int>(drawn.size()), ratios);
        if (static_cast<int>(drawn.size()) == n_per_template) local = counts;
        std::vector<Split> slots;
        for (Split s : {Split::Train, Split::Valid, Split::Test}) slots.insert(slots.end(), local[s], s);
        SplitMix64 split_rng(derive_seed(seed, "splits/" + tmpl.template_id));
        split_rng.shuffle(slots);

        for (std::size_t i = 0; i < drawn.size(); ++i) {
            Task task;
            task.task_id = fmt::format("{}-{:03d}", tmpl.template_id, i + 1);
            task.group = tmpl.group;
            task.template_id = tmpl.template_id;
            task.description = drawn[i].description;
            task.expected_answer = drawn[i].expected_answer;
            task.split = slots[i];
            task.tool_allowlist = group_tools(tmpl.group);
            result.reference_cells[task.task_id] = drawn[i].reference_cells;
            result.tasks.push_back(std::move(task));
        }
    }
    return result;
}

} // namespace hintcoach::world
