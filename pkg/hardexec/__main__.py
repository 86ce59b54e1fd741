"""This file is the entry point for the complete Hardexec package"""
# Allow user to directly use hardexec without installing it.
import hardexec.main

hardexec.main.main()
