#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json_io.hpp"
#include "recommender.hpp"

namespace stprec {

/// Service/CLI settings. File keys: port, data_path, vocab_path,
/// default_alpha, default_k_neighbors, default_limit, similarity_weights
/// {college, programs, interests, expertise}. All keys are optional.
struct Config {
    int port = 8080;
    std::string data_path = "stp_state.json";
    std::optional<std::string> vocab_path;
    RecommendParams defaults;

    static Config from_json(const json& j)
    {
        if (!j.is_object())
            throw Error(ErrorCode::parse_error, "config must be a JSON object");
        Config c;
        try {
            if (j.contains("port"))
                c.port = j.at("port").get<int>();
            if (j.contains("data_path"))
                c.data_path = j.at("data_path").get<std::string>();
            if (j.contains("vocab_path") && !j.at("vocab_path").is_null())
                c.vocab_path = j.at("vocab_path").get<std::string>();
            if (j.contains("default_alpha"))
                c.defaults.alpha = j.at("default_alpha").get<double>();
            if (j.contains("default_k_neighbors"))
                c.defaults.similarity.k_neighbors = j.at("default_k_neighbors").get<std::size_t>();
            if (j.contains("default_limit"))
                c.defaults.limit = j.at("default_limit").get<std::size_t>();
            if (j.contains("similarity_weights")) {
                const auto& w = j.at("similarity_weights");
                auto& s = c.defaults.similarity;
                s.weight_college = w.value("college", s.weight_college);
                s.weight_programs = w.value("programs", s.weight_programs);
                s.weight_interests = w.value("interests", s.weight_interests);
                s.weight_expertise = w.value("expertise", s.weight_expertise);
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::parse_error, std::string("invalid config: ") + e.what());
        }
        if (c.port < 0 || c.port > 65535)
            throw Error(ErrorCode::validation_failed, "port must be within 0..65535");
        c.defaults.validate();
        return c;
    }

    static Config load(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::io_error, "cannot read config " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            return from_json(json::parse(buf.str()));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::parse_error, std::string("config is not valid JSON: ") + e.what());
        }
    }
};

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_error, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace stprec
