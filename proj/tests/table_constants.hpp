#pragma once

// Literal hyperparameter values for the three reproduction profiles, kept as
// raw numbers in one place; the preset cross-check test compares the preset
// builders against these field by field.

namespace cpsro::tables {

// Leduc poker profile.
inline constexpr int kLeducBufferSize = 10000;
inline constexpr int kLeducBatchSize = 512;
inline constexpr double kLeducLearningRate = 5e-3;
inline constexpr double kLeducGamma = 1.0;
inline constexpr double kLeducEpsilon = 0.05;
inline constexpr int kLeducTargetUpdateFreq = 5;
inline constexpr int kLeducHidden[] = {256, 256, 256};
inline constexpr int kLeducOracleEpisodes = 20000;
inline constexpr double kLeducPsdDiversityWeight = 1.0;
inline constexpr int kLeducConfluxStart = 10;
inline constexpr int kLeducConfluxInterval = 2;
inline constexpr int kLeducNumSubs = 3;
inline constexpr int kLeducNumInferences = 3;
inline constexpr int kLeducPoolSize = 5;

// Goofspiel (5 point cards) profile.
inline constexpr int kGoofBufferSize = 10000;
inline constexpr int kGoofBatchSize = 512;
inline constexpr double kGoofLearningRate = 5e-3;
inline constexpr double kGoofGamma = 1.0;
inline constexpr double kGoofEpsilon = 0.05;
inline constexpr int kGoofTargetUpdateFreq = 5;
inline constexpr int kGoofHidden[] = {512, 512, 512};
inline constexpr int kGoofOracleEpisodes = 30000;
inline constexpr double kGoofPsdDiversityWeight = 1.0;
inline constexpr int kGoofConfluxStart = 20;
inline constexpr int kGoofConfluxInterval = 3;
inline constexpr int kGoofNumSubs = 5;
inline constexpr int kGoofNumInferences = 3;
inline constexpr int kGoofPoolSize = 8;

// Liar's Dice profile.
inline constexpr int kDiceBufferSize = 100000;
inline constexpr int kDiceBatchSize = 512;
inline constexpr double kDiceLearningRate = 5e-4;
inline constexpr double kDiceGamma = 0.99;
inline constexpr double kDiceEpsilon = 0.05;
inline constexpr int kDiceTargetUpdateFreq = 5;
inline constexpr double kDiceSoftTau = 0.005;
inline constexpr double kDicePerAlpha = 0.6;
inline constexpr double kDicePerBeta = 0.4;
inline constexpr double kDiceGradClip = 10.0;
inline constexpr int kDiceHidden[] = {256, 256, 128};
inline constexpr int kDiceOracleEpisodes = 200000;
inline constexpr double kDicePsdDiversityWeight = 1.0;
inline constexpr int kDiceConfluxStart = 10;
inline constexpr int kDiceConfluxInterval = 2;
inline constexpr int kDiceNumSubs = 3;
inline constexpr int kDiceNumInferences = 3;
inline constexpr int kDicePoolSize = 5;

}  // namespace cpsro::tables
