#ifndef H2CHAIN_HASH_HPP
#define H2CHAIN_HASH_HPP

#include <string>
#include <string_view>

namespace h2chain {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace h2chain

#endif  // H2CHAIN_HASH_HPP
