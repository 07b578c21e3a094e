#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"
#include "syncplan/ltl/formula.hpp"

namespace syncplan {

namespace detail {

inline std::vector<std::string> split_words(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    return words;
}

inline std::string strip_comment(const std::string& line) {
    auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

// Names become parts of composite state names ("a,b>c@1"), so the separators are reserved.
inline bool valid_state_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c == ',' || c == '>' || c == '@' || c == '(' || c == ')' || c == '#' || c == '"' ||
            std::isspace(static_cast<unsigned char>(c)))
            return false;
    return true;
}

inline bool valid_prop_name(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    static const std::set<std::string> reserved{"X", "F", "G", "U", "R", "true", "false"};
    return !reserved.count(s);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

// Robot file, one directive per line, '#' starts a comment:
//   name <id>
//   rho <lower> <upper>
//   init <state>
//   state <state> [props <p1> <p2> ...]
//   edge <src> <dst> <weight>
inline RobotModel parse_robot(const std::string& text, const std::string& source = "<robot>") {
    RobotModel robot;
    bool have_init = false;
    bool have_rho = false;
    std::string init_name;
    std::size_t init_line = 0;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        auto words = detail::split_words(detail::strip_comment(line));
        if (words.empty()) continue;
        const std::string& kw = words[0];
        try {
            if (kw == "name") {
                if (words.size() != 2) throw ParseError(where, "expected 'name <id>'");
                robot.name = words[1];
            } else if (kw == "rho") {
                if (words.size() != 3) throw ParseError(where, "expected 'rho <lower> <upper>'");
                robot.rho_lower = Rational::parse(words[1]);
                robot.rho_upper = Rational::parse(words[2]);
                have_rho = true;
            } else if (kw == "init") {
                if (words.size() != 2) throw ParseError(where, "expected 'init <state>'");
                init_name = words[1];
                init_line = lineno;
                have_init = true;
            } else if (kw == "state") {
                if (words.size() < 2) throw ParseError(where, "expected 'state <state> [props ...]'");
                if (!detail::valid_state_name(words[1])) throw ParseError(where, "invalid state name '" + words[1] + "'");
                Label label;
                if (words.size() > 2) {
                    if (words[2] != "props") throw ParseError(where, "expected 'props' after the state name");
                    for (std::size_t i = 3; i < words.size(); ++i) {
                        if (!detail::valid_prop_name(words[i]))
                            throw ParseError(where, "invalid proposition name '" + words[i] + "'");
                        label.insert(words[i]);
                    }
                }
                robot.ts.add_state(words[1], std::move(label));
            } else if (kw == "edge") {
                if (words.size() != 4) throw ParseError(where, "expected 'edge <src> <dst> <weight>'");
                std::int64_t w = 0;
                try {
                    std::size_t used = 0;
                    w = std::stoll(words[3], &used);
                    if (used != words[3].size()) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    throw ParseError(where, "edge weight must be a positive integer");
                }
                if (!robot.ts.add_edge(words[1], words[2], w)) throw ParseError(where, "duplicate edge");
            } else {
                throw ParseError(where, "unknown directive '" + kw + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(where, e.what());
        }
    }
    if (robot.name.empty()) throw ParseError(source, "missing 'name'");
    if (!have_init) throw ParseError(source, "missing 'init'");
    if (!have_rho) throw ParseError(source, "missing 'rho'");
    try {
        robot.ts.set_initial(init_name);
        robot.validate();
    } catch (const ModelError& e) {
        throw ParseError(source + ":" + std::to_string(init_line), e.what());
    }
    return robot;
}

inline RobotModel load_robot(const std::string& path) { return parse_robot(detail::read_file(path), path); }

// Mission file:
//   formula <LTL>
//   optimizing <prop>
// The proposition set is the union of the robots' labels plus the optimizing proposition.
inline Mission parse_mission(const std::string& text, const std::set<std::string>& props,
                             const std::string& source = "<mission>") {
    std::string formula;
    std::string optimizing;
    std::size_t formula_line = 0;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        std::string body = detail::strip_comment(line);
        auto words = detail::split_words(body);
        if (words.empty()) continue;
        if (words[0] == "formula") {
            auto start = body.find("formula") + 7;
            formula = body.substr(start);
            formula.erase(0, formula.find_first_not_of(" \t"));
            formula.erase(formula.find_last_not_of(" \t\r") + 1);
            formula_line = lineno;
        } else if (words[0] == "optimizing") {
            if (words.size() != 2) throw ParseError(where, "expected 'optimizing <prop>'");
            optimizing = words[1];
        } else {
            throw ParseError(where, "unknown directive '" + words[0] + "'");
        }
    }
    if (formula_line == 0) throw ParseError(source, "missing 'formula'");
    if (optimizing.empty()) throw ParseError(source, "missing 'optimizing'");
    if (!detail::valid_prop_name(optimizing)) throw ParseError(source, "invalid proposition '" + optimizing + "'");
    try {
        return make_mission(formula, optimizing, props);
    } catch (const ParseError& e) {
        throw ParseError(source + ":" + std::to_string(formula_line), e.what());
    }
}

inline std::set<std::string> propositions_of(const std::vector<RobotModel>& robots) {
    std::set<std::string> props;
    for (const auto& r : robots) {
        auto p = r.ts.propositions();
        props.insert(p.begin(), p.end());
    }
    return props;
}

inline Mission load_mission(const std::string& path, const std::vector<RobotModel>& robots) {
    return parse_mission(detail::read_file(path), propositions_of(robots), path);
}

}  // namespace syncplan
