// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/world/world.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "hintcoach/action/interpreter.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::world {

using action::Table;
using action::ToolFailure;

void Graph::add_node(const std::string& id, Attributes attrs) { nodes[id] = std::move(attrs); }

void Graph::add_edge(const std::string& a, const std::string& b, Attributes attrs) {
    if (!nodes.count(a) || !nodes.count(b)) {
        throw ValidationError("edge", "edge endpoint missing from graph " + name + ": " + a + " / " + b);
    }
    edges[std::minmax(a, b)] = std::move(attrs);
}

const Attributes* Graph::find_edge(const std::string& a, const std::string& b) const {
    auto it = edges.find(std::minmax(a, b));
    return it == edges.end() ? nullptr : &it->second;
}

std::vector<std::string> Graph::neighbours(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [key, attrs] : edges) {
        if (key.first == id) out.push_back(key.second);
        else if (key.second == id) out.push_back(key.first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string GraphSet::describe() const {
    return fmt::format("PaperNet with {} nodes and {} edges; AuthorNet with {} nodes and {} edges",
                       paper_net.nodes.size(), paper_net.edges.size(), author_net.nodes.size(),
                       author_net.edges.size());
}

const Graph& GraphSet::get(const std::string& name) const {
    if (name == "PaperNet") return paper_net;
    if (name == "AuthorNet") return author_net;
    throw ToolFailure("unknown graph '" + name + "'; expected 'PaperNet' or 'AuthorNet'");
}

const Table& World::table(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw NotFoundError("no table named '" + name + "'");
    return *it->second;
}

namespace {

const std::vector<std::string> kCarriers = {"AA", "DL", "UA", "WN", "B6"};
const std::vector<std::string> kAirports = {"BUF", "PHL", "JFK", "ORD", "ATL", "LAX", "SFO", "SEA", "DEN", "BOS"};
const std::vector<std::string> kCities = {"Philadelphia", "Tampa", "Tucson", "Reno"};
const std::vector<std::string> kCategories = {"Italian", "Mexican", "Bakeries", "Sushi Bars", "Coffee & Tea"};
const std::vector<std::string> kNameFirst = {"Golden", "Blue",   "Rustic", "Little", "Happy", "Silver",
                                             "Urban",  "Corner", "Olive",  "Maple",  "Sunny", "Iron"};
const std::vector<std::string> kNameSecond = {"Spoon", "Table", "Oven",   "Garden", "Kettle", "Fork",
                                              "Bowl",  "Lantern", "Grill", "Pantry", "Bistro", "Cup"};
const std::vector<std::string> kGiven = {"Alice", "Bruno", "Chen", "Dana",  "Elif",  "Farid", "Grace", "Hiro",
                                         "Ines",  "Jonas", "Kara", "Luis",  "Mei",   "Nadia", "Omar",  "Priya"};
const std::vector<std::string> kFamily = {"Abbott", "Baker", "Costa", "Dubois", "Evans", "Fischer", "Garcia",
                                          "Hansen", "Ito",   "Jain",  "Kowal",  "Lopez", "Moreau",  "Nakamura"};
const std::vector<std::string> kOrgs = {"Northfield University", "Lakeside Institute", "Harbor Labs",
                                        "Summit College"};
const std::vector<std::string> kTitleAdj = {"Scalable", "Robust", "Efficient", "Adaptive", "Sparse", "Neural",
                                            "Incremental", "Private"};
const std::vector<std::string> kTitleTopic = {"Graph Matching", "Query Planning", "Entity Linking",
                                              "Index Compression", "Stream Joins", "Schema Mapping",
                                              "Table Retrieval"};
const std::vector<std::string> kTitleDomain = {"Knowledge Bases", "Data Lakes", "Web Tables", "Sensor Networks",
                                               "Code Search"};
const std::vector<std::string> kVenues = {"VLDB", "SIGMOD", "ICDE", "KDD", "ACL"};
const std::vector<std::string> kEvents = {"Budget Review", "Design Sync",   "Team Offsite",      "Product Demo",
                                          "Hiring Panel",  "Vendor Call",   "Security Training", "Quarterly Planning"};
const std::vector<std::string> kLocations = {"Room 204", "Conference Hall B", "Main Lobby", "Cafe Terrace",
                                             "Board Room", "Lab 3", "Studio 9"};
const std::vector<std::string> kMonths = {"January", "February", "March",     "April",   "May",      "June",
                                          "July",    "August",   "September", "October", "November", "December"};

template <typename T>
const T& pick(SplitMix64& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(rng.below(items.size()))];
}

int between(SplitMix64& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

std::string iso_date(int year, int month, int day) { return fmt::format("{:04d}-{:02d}-{:02d}", year, month, day); }

/// Adds `offset` days to 2022-01-01-style dates using a fixed civil calendar.
std::string add_days(int year, int month, int day, int offset) {
    static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    auto month_len = [](int y, int m) {
        bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return m == 2 && leap ? 29 : kDays[m - 1];
    };
    day += offset;
    while (day > month_len(year, month)) {
        day -= month_len(year, month);
        if (++month > 12) {
            month = 1;
            ++year;
        }
    }
    return iso_date(year, month, day);
}

std::shared_ptr<const Table> make_flights(SplitMix64 rng, int n) {
    auto t = std::make_shared<Table>();
    t->name = "flights";
    t->columns = {"IATA_Code_Marketing_Airline", "Flight_Number_Marketing_Airline", "Origin", "Dest", "FlightDate",
                  "DepTime", "DepDelayMinutes", "ArrDelayMinutes", "Distance", "AirTime"};
    for (int i = 0; i < n; ++i) {
        std::string origin = pick(rng, kAirports);
        std::string dest = origin;
        while (dest == origin) dest = pick(rng, kAirports);
        int dep_delay = rng.below(10) < 6 ? 0 : between(rng, 1, 120);
        int arr_delay = std::max(0, dep_delay + between(rng, -15, 30));
        int distance = between(rng, 100, 2600);
        int air_time = distance / 8 + between(rng, 15, 40);
        t->rows.push_back({pick(rng, kCarriers), std::to_string(between(rng, 100, 999)), origin, dest,
                           add_days(2022, 1, 1, between(rng, 0, 4)),
                           fmt::format("{:02d}{:02d}", between(rng, 5, 22), between(rng, 0, 59)),
                           fmt::format("{}.0", dep_delay), fmt::format("{}.0", arr_delay), std::to_string(distance),
                           std::to_string(air_time)});
    }
    return t;
}

std::shared_ptr<const Table> make_coffee(SplitMix64 rng, int n) {
    auto t = std::make_shared<Table>();
    t->name = "coffee";
    t->columns = {"Date", "Low", "High", "Close"};
    int cents = 12000 + between(rng, 0, 2000);
    for (int i = 0; i < n; ++i) {
        int open = cents;
        cents = std::max(5000, cents + between(rng, -300, 300));
        int low = std::min(open, cents) - between(rng, 0, 150);
        int high = std::max(open, cents) + between(rng, 0, 150);
        auto money = [](int c) { return fmt::format("{}.{:02d}", c / 100, c % 100); };
        t->rows.push_back({add_days(2020, 3, 2, i), money(low), money(high), money(cents)});
    }
    return t;
}

std::shared_ptr<const Table> make_yelp(SplitMix64 rng, int n) {
    auto t = std::make_shared<Table>();
    t->name = "yelp";
    t->columns = {"name", "city", "categories", "review_count", "stars"};
    std::vector<std::string> names;
    for (const auto& a : kNameFirst) {
        for (const auto& b : kNameSecond) names.push_back(a + " " + b);
    }
    rng.shuffle(names);
    for (int i = 0; i < n; ++i) {
        std::string name = names[static_cast<std::size_t>(i) % names.size()];
        if (static_cast<std::size_t>(i) >= names.size()) name += " " + std::to_string(i / static_cast<int>(names.size()) + 1);
        int half_stars = between(rng, 2, 10);
        t->rows.push_back({name, pick(rng, kCities), pick(rng, kCategories), std::to_string(between(rng, 5, 800)),
                           fmt::format("{}.{}", half_stars / 2, half_stars % 2 ? 5 : 0)});
    }
    return t;
}

std::shared_ptr<const GraphSet> make_graphs(SplitMix64 rng, int n_papers, int n_authors) {
    auto g = std::make_shared<GraphSet>();
    g->paper_net.name = "PaperNet";
    g->author_net.name = "AuthorNet";

    std::vector<std::string> people;
    for (const auto& a : kGiven) {
        for (const auto& b : kFamily) people.push_back(a + " " + b);
    }
    rng.shuffle(people);
    people.resize(std::min<std::size_t>(people.size(), static_cast<std::size_t>(std::max(n_authors, 2))));
    for (const auto& p : people) g->author_net.add_node(p, {{"organization", pick(rng, kOrgs)}});

    std::vector<std::string> titles;
    for (const auto& a : kTitleAdj) {
        for (const auto& b : kTitleTopic) {
            for (const auto& c : kTitleDomain) titles.push_back(a + " " + b + " for " + c);
        }
    }
    rng.shuffle(titles);
    titles.resize(std::min<std::size_t>(titles.size(), static_cast<std::size_t>(n_papers)));

    std::map<std::pair<std::string, std::string>, std::vector<std::string>> shared;
    for (const auto& title : titles) {
        int k = between(rng, 2, std::min(4, static_cast<int>(people.size())));
        std::vector<std::string> pool = people;
        rng.shuffle(pool);
        pool.resize(static_cast<std::size_t>(k));
        g->paper_net.add_node(title, {{"authors", join(pool, ", ")},
                                      {"year", std::to_string(between(rng, 2015, 2023))},
                                      {"venue", pick(rng, kVenues)}});
        for (std::size_t i = 0; i < pool.size(); ++i) {
            for (std::size_t j = i + 1; j < pool.size(); ++j) shared[std::minmax(pool[i], pool[j])].push_back(title);
        }
    }
    for (const auto& [pair, papers] : shared) {
        g->author_net.add_edge(pair.first, pair.second,
                               {{"weight", std::to_string(papers.size())}, {"papers", join(papers, "; ")}});
    }
    return g;
}

std::vector<AgendaDoc> make_agenda(SplitMix64 rng, int n) {
    std::vector<AgendaDoc> docs;
    for (int i = 0; i < n; ++i) {
        AgendaDoc d;
        d.doc_id = fmt::format("doc-{:03d}", i + 1);
        d.person = pick(rng, kGiven) + " " + pick(rng, kFamily);
        d.event = pick(rng, kEvents);
        d.location = pick(rng, kLocations);
        int month = between(rng, 1, 12);
        d.date_words = fmt::format("{} {}, 2025", kMonths[static_cast<std::size_t>(month - 1)], between(rng, 1, 28));
        int start = between(rng, 8, 16);
        auto clock = [](int h) { return fmt::format("{}:00 {}", h > 12 ? h - 12 : h, h >= 12 ? "PM" : "AM"); };
        d.text = fmt::format("{} will attend the {} at {} from {} to {} on {}.", d.person, d.event, d.location,
                             clock(start), clock(start + 1), d.date_words);
        docs.push_back(std::move(d));
    }
    return docs;
}

nlohmann::json graph_json(const Graph& g) {
    nlohmann::json nodes = nlohmann::json::object();
    for (const auto& [id, attrs] : g.nodes) nodes[id] = attrs;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [key, attrs] : g.edges) edges.push_back({{"a", key.first}, {"b", key.second}, {"attrs", attrs}});
    return {{"nodes", nodes}, {"edges", edges}};
}

Graph graph_from_json(const std::string& name, const nlohmann::json& j) {
    Graph g;
    g.name = name;
    for (const auto& [id, attrs] : j.at("nodes").items()) g.add_node(id, attrs.get<Attributes>());
    for (const auto& e : j.at("edges")) {
        g.add_edge(e.at("a").get<std::string>(), e.at("b").get<std::string>(), e.at("attrs").get<Attributes>());
    }
    return g;
}

} // namespace

World generate_world(std::uint64_t seed, const WorldSizes& sizes) {
    auto require = [](int n, const char* field) {
        if (n < 1) throw ValidationError(field, fmt::format("{} size must be at least 1", field));
    };
    require(sizes.flights, "flights");
    require(sizes.coffee, "coffee");
    require(sizes.yelp, "yelp");
    require(sizes.papers, "papers");
    require(sizes.authors, "authors");
    require(sizes.agenda, "agenda");

    World w;
    w.seed = seed;
    w.tables["flights"] = make_flights(SplitMix64(derive_seed(seed, "world/flights")), sizes.flights);
    w.tables["coffee"] = make_coffee(SplitMix64(derive_seed(seed, "world/coffee")), sizes.coffee);
    w.tables["yelp"] = make_yelp(SplitMix64(derive_seed(seed, "world/yelp")), sizes.yelp);
    w.graphs = make_graphs(SplitMix64(derive_seed(seed, "world/dblp")), sizes.papers, sizes.authors);
    w.agenda = make_agenda(SplitMix64(derive_seed(seed, "world/agenda")), sizes.agenda);
    return w;
}

nlohmann::json export_world(const World& world) {
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& [name, t] : world.tables) tables[name] = {{"columns", t->columns}, {"rows", t->rows}};
    nlohmann::json agenda = nlohmann::json::array();
    for (const auto& d : world.agenda) {
        agenda.push_back({{"doc_id", d.doc_id},
                          {"text", d.text},
                          {"person", d.person},
                          {"event", d.event},
                          {"location", d.location},
                          {"date_words", d.date_words}});
    }
    return {{"seed", world.seed},
            {"tables", tables},
            {"graphs", {{"PaperNet", graph_json(world.graphs->paper_net)}, {"AuthorNet", graph_json(world.graphs->author_net)}}},
            {"agenda", agenda}};
}

World import_world(const nlohmann::json& doc) {
    try {
        World w;
        w.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& [name, t] : doc.at("tables").items()) {
            auto table = std::make_shared<Table>();
            table->name = name;
            table->columns = t.at("columns").get<std::vector<std::string>>();
            table->rows = t.at("rows").get<std::vector<std::vector<std::string>>>();
            for (const auto& row : table->rows) {
                if (row.size() != table->columns.size()) {
                    throw ValidationError("rows", "table '" + name + "' has a row with the wrong number of cells");
                }
            }
            w.tables[name] = table;
        }
        auto graphs = std::make_shared<GraphSet>();
        graphs->paper_net = graph_from_json("PaperNet", doc.at("graphs").at("PaperNet"));
        graphs->author_net = graph_from_json("AuthorNet", doc.at("graphs").at("AuthorNet"));
        w.graphs = graphs;
        for (const auto& d : doc.at("agenda")) {
            w.agenda.push_back({d.at("doc_id"), d.at("text"), d.at("person"), d.at("event"), d.at("location"),
                                d.at("date_words")});
        }
        return w;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("world", std::string("malformed world document: ") + ex.what());
    }
}

std::vector<std::string> keyword_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<const AgendaDoc*> retrieve_agenda(const World& world, const std::string& query, std::size_t k) {
    auto q = keyword_tokens(query);
    std::set<std::string> words(q.begin(), q.end());
    std::vector<std::pair<int, const AgendaDoc*>> scored;
    for (const auto& d : world.agenda) {
        auto t = keyword_tokens(d.text);
        std::set<std::string> doc_words(t.begin(), t.end());
        int score = 0;
        for (const auto& w : words) score += doc_words.count(w) ? 1 : 0;
        if (score > 0) scored.emplace_back(score, &d);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->doc_id < b.second->doc_id;
    });
    std::vector<const AgendaDoc*> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
    return out;
}

} // namespace hintcoach::world
