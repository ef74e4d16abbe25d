#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "rtoi/core/error.hpp"

// Run provenance. Kept out of the library proper because it is the only
// piece that needs OpenSSL.
namespace rtoi::cli {

inline std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw DataError("Digest", "sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

struct Manifest {
    std::string command;
    std::vector<std::string> args;                 // as given, minus paths' directories
    std::map<std::string, std::string> config;     // effective key=value set
    std::string config_text;                       // canonical text that config_hash covers
    std::map<std::string, std::string> inputs;     // basename -> digest
    std::map<std::string, std::string> outputs;    // file name -> digest

    // Deterministic: keys sorted, no timestamps, no thread count.
    std::string to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["args"] = args;
        j["config"] = config;
        j["config_hash"] = sha256_hex(config_text);
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        return j.dump(2) + "\n";
    }
};

}  // namespace rtoi::cli
