from __future__ import annotations

from .base import ClassifierKind
from .boosting import fit_adaboost, proba_adaboost
from .mlp import fit_mlp, proba_mlp
from .naive_bayes import fit_gaussian_nb, proba_gaussian_nb
from .neighbors import fit_knn, proba_knn
from .svm import fit_linear_svm, fit_rbf_svm, proba_linear_svm, proba_rbf_svm
from .tree import fit_decision_tree, fit_random_forest, proba_decision_tree, proba_random_forest

FIT = {
    ClassifierKind.KNN: fit_knn,
    ClassifierKind.DECISION_TREE: fit_decision_tree,
    ClassifierKind.RANDOM_FOREST: fit_random_forest,
    ClassifierKind.ADABOOST: fit_adaboost,
    ClassifierKind.LINEAR_SVM: fit_linear_svm,
    ClassifierKind.RBF_SVM: fit_rbf_svm,
    ClassifierKind.GAUSSIAN_NB: fit_gaussian_nb,
    ClassifierKind.NEURAL_NET: fit_mlp,
}

PROBA = {
    ClassifierKind.KNN: proba_knn,
    ClassifierKind.DECISION_TREE: proba_decision_tree,
    ClassifierKind.RANDOM_FOREST: proba_random_forest,
    ClassifierKind.ADABOOST: proba_adaboost,
    ClassifierKind.LINEAR_SVM: proba_linear_svm,
    ClassifierKind.RBF_SVM: proba_rbf_svm,
    ClassifierKind.GAUSSIAN_NB: proba_gaussian_nb,
    ClassifierKind.NEURAL_NET: proba_mlp,
}
