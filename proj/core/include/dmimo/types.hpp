#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace dmimo {

// Rows index APs, columns index UEs throughout the library.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class GroupingInfeasible : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class DegenerateInterference : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class QoSInfeasible : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class RoundingInfeasible : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dmimo
