#include "nlcm/dataset.hpp"

#include <numeric>
#include <sstream>
#include <unordered_set>

#include "text.hpp"

namespace nlcm {

std::size_t Dataset::num_observed_entries() const {
    std::size_t n = 0;
    for (const auto& items : items_of) n += items.size();
    return n;
}

void Dataset::rebuild_index() {
    items_of.assign(num_subjects, {});
    subjects_of.assign(num_items, {});
    for (std::size_t i = 0; i < num_subjects; ++i)
        for (std::size_t j = 0; j < num_items; ++j)
            if (is_observed(i, j)) {
                items_of[i].push_back(j);
                subjects_of[j].push_back(i);
            }
    domain_members.assign(num_domains, {});
    for (std::size_t i = 0; i < num_subjects; ++i) domain_members[domain[i]].push_back(i);
}

Dataset make_dataset(std::vector<std::string> subject_ids, std::vector<std::size_t> domain,
                     std::vector<std::optional<std::size_t>> cause, const std::vector<int>& values,
                     std::size_t num_items, const RootedWeightedTree& domain_tree,
                     const RootedWeightedTree& cause_tree, std::vector<std::string> item_names) {
    const std::size_t n = subject_ids.size();
    if (domain.size() != n || cause.size() != n || values.size() != n * num_items)
        throw DatasetError("column lengths disagree");
    Dataset d;
    d.num_subjects = n;
    d.num_items = num_items;
    d.num_domains = domain_tree.num_leaves();
    d.num_causes = cause_tree.num_leaves();
    d.domain_labels = domain_tree.leaf_order();
    d.cause_labels = cause_tree.leaf_order();
    if (item_names.empty()) {
        for (std::size_t j = 0; j < num_items; ++j) item_names.push_back("item_" + std::to_string(j + 1));
    }
    if (item_names.size() != num_items) throw DatasetError("item name count mismatch");
    d.item_names = std::move(item_names);

    std::unordered_set<std::string> seen;
    for (const auto& id : subject_ids)
        if (!seen.insert(id).second) throw DatasetError("duplicate subject id: " + id);
    for (auto g : domain)
        if (g >= d.num_domains) throw DatasetError("domain rank out of range");
    for (auto c : cause)
        if (c && *c >= d.num_causes) throw DatasetError("cause rank out of range");

    d.subject_ids = std::move(subject_ids);
    d.domain = std::move(domain);
    d.cause = std::move(cause);
    d.x.assign(n * num_items, 0);
    d.observed.assign(n * num_items, 0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        const int v = values[k];
        if (v == 0 || v == 1) {
            d.x[k] = static_cast<std::uint8_t>(v);
            d.observed[k] = 1;
        } else if (v != -1) {
            throw DatasetError("response value outside {0,1,missing}");
        }
    }
    d.rebuild_index();
    return d;
}

Dataset load_dataset(std::string_view document, const RootedWeightedTree& domain_tree,
                     const RootedWeightedTree& cause_tree) {
    const auto lines = detail::split_lines(document);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw DatasetError("empty data document");

    auto header = detail::split(detail::trim(lines[first]), ',');
    for (auto& h : header) h = detail::trim(h);
    if (header.size() < 3 || header[0] != "id" || header[1] != "domain" || header[2] != "cause")
        throw DatasetError("expected header id,domain,cause,item_1,...");
    const std::size_t num_items = header.size() - 3;
    std::vector<std::string> item_names;
    for (std::size_t j = 0; j < num_items; ++j) item_names.emplace_back(header[3 + j]);

    std::vector<std::string> ids;
    std::vector<std::size_t> domains;
    std::vector<std::optional<std::size_t>> causes;
    std::vector<int> values;
    for (std::size_t l = first + 1; l < lines.size(); ++l) {
        const auto line = detail::trim(lines[l]);
        if (line.empty()) continue;
        auto fields = detail::split(line, ',');
        const std::string where = "line " + std::to_string(l + 1);
        if (fields.size() != header.size())
            throw DatasetError(where + ": expected " + std::to_string(header.size()) + " fields");
        for (auto& f : fields) f = detail::trim(f);

        ids.emplace_back(fields[0]);
        auto dnode = domain_tree.find(fields[1]);
        auto drank = dnode ? domain_tree.leaf_rank(*dnode) : std::nullopt;
        if (!drank)
            throw DatasetError(where + ": domain '" + std::string(fields[1]) +
                               "' is not a leaf of the domain tree");
        domains.push_back(*drank);
        if (fields[2].empty()) {
            causes.emplace_back();
        } else {
            auto cnode = cause_tree.find(fields[2]);
            auto crank = cnode ? cause_tree.leaf_rank(*cnode) : std::nullopt;
            if (!crank)
                throw DatasetError(where + ": cause '" + std::string(fields[2]) +
                                   "' is not a leaf of the cause tree");
            causes.emplace_back(*crank);
        }
        for (std::size_t j = 0; j < num_items; ++j) {
            const auto f = fields[3 + j];
            if (f == "NA") values.push_back(-1);
            else if (f == "0") values.push_back(0);
            else if (f == "1") values.push_back(1);
            else
                throw DatasetError(where + ": item value '" + std::string(f) +
                                   "' outside {0,1,NA}");
        }
    }
    return make_dataset(std::move(ids), std::move(domains), std::move(causes), values, num_items,
                        domain_tree, cause_tree, std::move(item_names));
}

Dataset read_dataset_file(const std::string& path, const RootedWeightedTree& domain_tree,
                          const RootedWeightedTree& cause_tree) {
    return load_dataset(detail::read_file(path), domain_tree, cause_tree);
}

std::string serialize_dataset(const Dataset& data) {
    std::ostringstream out;
    out << "id,domain,cause";
    for (const auto& name : data.item_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < data.num_subjects; ++i) {
        out << data.subject_ids[i] << ',' << data.domain_labels[data.domain[i]] << ',';
        if (data.cause[i]) out << data.cause_labels[*data.cause[i]];
        for (std::size_t j = 0; j < data.num_items; ++j) {
            out << ',';
            if (data.is_observed(i, j)) out << int(data.value(i, j));
            else out << "NA";
        }
        out << '\n';
    }
    return out.str();
}

const char* to_string(ScenarioTag tag) {
    switch (tag) {
        case ScenarioTag::I1: return "i-1";
        case ScenarioTag::I2: return "i-2";
        case ScenarioTag::II: return "ii";
        case ScenarioTag::III: return "iii";
    }
    return "?";
}

MissingnessScenario detect_scenario(const Dataset& data) {
    MissingnessScenario s;
    std::vector<std::size_t> observed_count(data.num_domains, 0);
    for (std::size_t i = 0; i < data.num_subjects; ++i) {
        if (data.cause[i]) ++observed_count[data.domain[i]];
        else s.domains_with_missing.insert(data.domain[i]);
    }
    if (s.domains_with_missing.empty()) s.tag = ScenarioTag::III;
    else if (s.domains_with_missing.size() >= 2) s.tag = ScenarioTag::II;
    else s.tag = observed_count[*s.domains_with_missing.begin()] == 0 ? ScenarioTag::I1
                                                                      : ScenarioTag::I2;
    return s;
}

}  // namespace nlcm
