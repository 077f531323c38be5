#include "rdpforge/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rdpforge {

using nlohmann::json;

namespace {

json alphabet_to_json(const AlphabetSpec& a) {
    return json{{"actions", a.actions()},
                {"obs_features", a.obs_features()},
                {"rewards", a.rewards()},
                {"horizon", a.horizon()},
                {"terminal_obs", a.terminal_obs_symbols()}};
}

AlphabetSpec alphabet_from_json(const json& j) {
    return AlphabetSpec(j.at("actions").get<std::vector<std::string>>(),
                        j.at("obs_features").get<std::vector<std::vector<std::string>>>(),
                        j.at("rewards").get<std::vector<double>>(), j.at("horizon").get<int>(),
                        j.at("terminal_obs").get<std::vector<std::string>>());
}

}  // namespace

void save_dataset(const Dataset& dataset, std::ostream& out) {
    json header{{"format", "rdpforge-dataset-v1"},
                {"alphabet", alphabet_to_json(dataset.alphabet)},
                {"metadata",
                 {{"generator", dataset.metadata.generator},
                  {"policy", dataset.metadata.policy},
                  {"seed", dataset.metadata.seed}}}};
    out << header.dump() << '\n';
    const AlphabetSpec& a = dataset.alphabet;
    for (const Episode& e : dataset.episodes) {
        json arr = json::array();
        for (const Step& s : e.steps) {
            json o = json::array();
            for (int i = 0; i < a.num_features(); ++i)
                o.push_back(a.feature_name(i, a.obs_feature_of(s.obs, i)));
            arr.push_back(json{{"a", a.action_name(s.action)},
                               {"o", std::move(o)},
                               {"r", a.reward_value(s.reward)}});
        }
        out << arr.dump() << '\n';
    }
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    save_dataset(dataset, out);
}

Dataset load_dataset(std::istream& in) {
    std::string line;
    size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(1, "missing header line");
    ++line_no;
    Dataset ds;
    try {
        json header = json::parse(line);
        ds.alphabet = alphabet_from_json(header.at("alphabet"));
        const json& md = header.at("metadata");
        ds.metadata.generator = md.value("generator", "");
        ds.metadata.policy = md.value("policy", "");
        ds.metadata.seed = md.value("seed", 0ull);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ParseError(line_no, std::string("bad header: ") + ex.what());
    }

    const AlphabetSpec& a = ds.alphabet;
    const int H = a.horizon();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json arr;
        try {
            arr = json::parse(line);
        } catch (const std::exception& ex) {
            throw ParseError(line_no, std::string("bad JSON: ") + ex.what());
        }
        if (!arr.is_array())
            throw ParseError(line_no, "expected a JSON array of steps");
        if (static_cast<int>(arr.size()) != H + 1)
            throw ParseError(line_no, "episode " + std::to_string(ds.episodes.size()) + " has " +
                                          std::to_string(arr.size()) + " steps, expected " +
                                          std::to_string(H + 1));
        Episode e;
        e.steps.reserve(arr.size());
        for (const json& js : arr) {
            Step s;
            std::string action = js.at("a").get<std::string>();
            auto aid = a.action_id(action);
            if (!aid) throw ParseError(line_no, "unknown action symbol '" + action + "'");
            s.action = *aid;
            const json& o = js.at("o");
            if (static_cast<int>(o.size()) != a.num_features())
                throw ParseError(line_no, "observation has wrong number of features");
            std::vector<SymbolId> feats(a.num_features());
            for (int i = 0; i < a.num_features(); ++i) {
                std::string sym = o[i].get<std::string>();
                auto fid = a.feature_id(i, sym);
                if (!fid)
                    throw ParseError(line_no, "unknown feature symbol '" + sym + "' for feature " +
                                                  std::to_string(i));
                feats[i] = *fid;
            }
            s.obs = a.obs_flat(feats);
            double r = js.at("r").get<double>();
            auto rid = a.reward_id(r);
            if (!rid) throw ParseError(line_no, "unknown reward value " + std::to_string(r));
            s.reward = *rid;
            e.steps.push_back(s);
        }
        ds.episodes.push_back(std::move(e));
    }
    try {
        ds.validate();
    } catch (const UsageError& ex) {
        throw ParseError(line_no, ex.what());
    }
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path);
    return load_dataset(in);
}

}  // namespace rdpforge
