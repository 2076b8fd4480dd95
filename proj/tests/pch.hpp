#pragma once

// Precompiled for the test suite: the framework plus the heavy third-party
// headers the library pulls in.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/QR>

#include <nlohmann/json.hpp>
