#ifndef PATNET_PATNET_HPP
#define PATNET_PATNET_HPP

#include "patnet/archive.hpp"
#include "patnet/error.hpp"
#include "patnet/evaluator.hpp"
#include "patnet/expansion.hpp"
#include "patnet/graph.hpp"
#include "patnet/ingestion.hpp"
#include "patnet/kinds.hpp"
#include "patnet/models.hpp"
#include "patnet/proximity.hpp"
#include "patnet/report.hpp"
#include "patnet/trainer.hpp"

#endif  // PATNET_PATNET_HPP
