#pragma once

#include <homolab/errors.hpp>
#include <homolab/evaluation.hpp>
#include <homolab/generator.hpp>
#include <homolab/graph.hpp>
#include <homolab/homophily.hpp>
#include <homolab/linear_models.hpp>
#include <homolab/sweep.hpp>
#include <homolab/version.hpp>
