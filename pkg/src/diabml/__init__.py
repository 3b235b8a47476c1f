"""Diabetes risk classification with BWO feature selection and SMOTE."""
