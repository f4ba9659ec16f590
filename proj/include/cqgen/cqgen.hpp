#pragma once

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/config.hpp"
#include "cqgen/dataset.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/extraction.hpp"
#include "cqgen/generation.hpp"
#include "cqgen/openai_client.hpp"
#include "cqgen/pipeline.hpp"
#include "cqgen/prompts.hpp"
#include "cqgen/ranking.hpp"
#include "cqgen/report.hpp"
#include "cqgen/runlog.hpp"
#include "cqgen/schemes.hpp"
#include "cqgen/scripted_backend.hpp"
#include "cqgen/sha256.hpp"
#include "cqgen/turns.hpp"
